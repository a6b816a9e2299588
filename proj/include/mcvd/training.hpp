#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mcvd/config.hpp"
#include "mcvd/decomposition.hpp"
#include "mcvd/env.hpp"
#include "mcvd/replay.hpp"

namespace mcvd {

// Epsilon-greedy joint action: each agent independently explores with
// probability epsilon, otherwise takes its greedy action. With epsilon = 0
// no random draws are consumed.
std::vector<int> select_actions(const AgentQNet& agents,
                                const std::vector<std::vector<double>>& observations,
                                std::span<const int> last_actions, double epsilon,
                                Rng& rng);

struct TrainMetrics {
    double loss_td = 0.0;
    double loss_jt = 0.0;
    double clip_scale_td = 1.0;
    double clip_scale_jt = 1.0;
};

// One evaluation snapshot. The matrix-game tables (per-agent Q-vectors,
// mixed joint values, joint approximation values over all action pairs) are
// only filled for that environment.
struct EvalReport {
    long step = 0;
    double mean_return = 0.0;
    double std_return = 0.0;
    double loss_td = 0.0;
    double loss_jt = 0.0;
    double epsilon = 0.0;
    std::vector<int> greedy_action;
    std::vector<std::vector<double>> q_vectors;
    std::vector<std::vector<double>> q_jt_table;
    std::vector<std::vector<double>> q_hat_table;
};

struct RunResult {
    std::vector<EvalReport> curve;
    const EvalReport& final_report() const;
};

// One training run: owns the environment, all value networks, the replay
// buffer and the derived random streams. Initialization, collection,
// sampling and evaluation each use an independent stream derived from the
// configured seed, so any run is reproducible bit-for-bit.
class Trainer {
public:
    explicit Trainer(const TrainingConfig& cfg);

    // One gradient update on the batch:
    //   y      = r + gamma (1 - t) * bootstrap(s', argmax individual values)
    //   Q_jt   = mixer over the chosen online individual values
    //   L_td   = mean w (Q_jt - y)^2 with the weight held constant,
    //   L_jt   = mean (Q^hat_jt(s, a) - y)^2  (joint approximation network)
    // then per-loss global gradient clipping and one RMSProp step. The two
    // losses touch disjoint parameter sets. Throws DivergenceError when a
    // loss turns non-finite.
    TrainMetrics train_step(std::span<const Transition* const> batch);

    // Collects one epsilon-greedy episode into the replay buffer; returns
    // the episode return.
    double run_episode(double epsilon);

    // Greedy-policy evaluation over `episodes` episodes on a dedicated
    // random stream; fills the matrix-game probe tables when applicable.
    EvalReport evaluate(int episodes);

    // Full schedule: episodes until n_steps environment steps, training
    // after each train_fre-th episode, hard target syncs on the configured
    // cycle, an evaluation row every evaluate_fre steps starting at step 0.
    RunResult run();

    void sync_all_targets();

    const TrainingConfig& config() const { return cfg_; }
    Env& env() { return *env_; }
    AgentQNet& agents() { return agents_; }
    JointApproxNet* joint() { return joint_ ? &*joint_ : nullptr; }
    MonotonicMixer* mixer() { return mixer_ ? &*mixer_ : nullptr; }
    ReplayBuffer& buffer() { return buffer_; }
    long total_steps() const { return total_steps_; }
    long episodes_completed() const { return episodes_; }

private:
    double bootstrap_value(const Transition& t);

    TrainingConfig cfg_;
    std::unique_ptr<Env> env_;
    AgentQNet agents_;
    std::optional<JointApproxNet> joint_;
    std::optional<MonotonicMixer> mixer_;
    std::optional<MonotonicMixer> mixer_target_;
    ReplayBuffer buffer_;
    EpsilonSchedule schedule_;
    OptimizerState opt_;
    Rng collect_rng_;
    Rng sample_rng_;
    Rng eval_rng_;
    long total_steps_ = 0;
    long episodes_ = 0;
};

// Convenience wrapper: build a Trainer and run the full schedule.
RunResult train_run(const TrainingConfig& cfg);

} // namespace mcvd
