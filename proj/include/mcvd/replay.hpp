#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mcvd/rng.hpp"

namespace mcvd {

// One environment step as stored for off-policy training. `last_actions`
// holds the previous step's joint action (-1 entries on the first step of
// an episode) so that online and target network inputs can be re-encoded
// exactly as they appeared during collection.
struct Transition {
    std::vector<double> state;
    std::vector<double> next_state;
    std::vector<std::vector<double>> obs;
    std::vector<std::vector<double>> next_obs;
    std::vector<int> last_actions;
    std::vector<int> actions;
    double reward = 0.0;
    bool terminal = false;
};

// Fixed-capacity ring buffer with uniform sampling (with replacement).
// Once full, each add overwrites the oldest transition.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void add(Transition t);

    std::size_t size() const { return count_; }
    std::size_t capacity() const { return slots_.size(); }

    // i = 0 addresses the oldest stored transition.
    const Transition& at(std::size_t i) const;

    // Uniform i.i.d. draw of batch_size transitions; nullopt until at least
    // batch_size transitions have been stored.
    std::optional<std::vector<const Transition*>> sample(std::size_t batch_size,
                                                         Rng& rng) const;

private:
    std::vector<Transition> slots_;
    std::size_t cursor_ = 0;
    std::size_t count_ = 0;
};

// Linear epsilon anneal from max_epsilon at step 0 down to min_epsilon at
// anneal_steps, constant afterwards.
struct EpsilonSchedule {
    double max_epsilon = 1.0;
    double min_epsilon = 0.05;
    long anneal_steps = 50000;

    double at(long step) const;
};

} // namespace mcvd
