#include "mcvd/replay.hpp"

#include <string>
#include <utility>

#include "mcvd/errors.hpp"

namespace mcvd {

ReplayBuffer::ReplayBuffer(std::size_t capacity) {
    if (capacity == 0) {
        throw ConfigError("replay buffer capacity must be positive");
    }
    slots_.resize(capacity);
}

void ReplayBuffer::add(Transition t) {
    slots_[cursor_] = std::move(t);
    cursor_ = (cursor_ + 1) % slots_.size();
    if (count_ < slots_.size()) {
        ++count_;
    }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= count_) {
        throw UsageError("replay index " + std::to_string(i) + " outside [0, " +
                         std::to_string(count_) + ")");
    }
    // When full, the slot after the cursor is the oldest entry.
    const std::size_t oldest = count_ == slots_.size() ? cursor_ : 0;
    return slots_[(oldest + i) % slots_.size()];
}

std::optional<std::vector<const Transition*>>
ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
    if (batch_size == 0) {
        throw UsageError("sample batch size must be positive");
    }
    if (count_ < batch_size) {
        return std::nullopt;
    }
    std::vector<const Transition*> batch;
    batch.reserve(batch_size);
    for (std::size_t k = 0; k < batch_size; ++k) {
        batch.push_back(&slots_[static_cast<std::size_t>(
            rng.uniform_int(static_cast<int>(count_)))]);
    }
    return batch;
}

double EpsilonSchedule::at(long step) const {
    if (step < 0) {
        throw UsageError("epsilon schedule queried at a negative step");
    }
    if (step >= anneal_steps) {
        return min_epsilon;
    }
    const double frac = static_cast<double>(step) / static_cast<double>(anneal_steps);
    return max_epsilon - (max_epsilon - min_epsilon) * frac;
}

} // namespace mcvd
