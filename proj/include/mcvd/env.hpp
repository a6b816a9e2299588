#pragma once

#include <span>
#include <utility>
#include <vector>

#include "mcvd/rng.hpp"

namespace mcvd {

struct StepResult {
    double reward = 0.0;
    bool terminal = false;
};

// Cooperative multi-agent environment: one shared reward, per-agent
// observations, a flat global state for centralized components, and a
// discrete action set common to all agents.
class Env {
public:
    virtual ~Env() = default;

    virtual int n_agents() const = 0;
    virtual int n_actions() const = 0;
    virtual int state_dim() const = 0;
    virtual int obs_dim() const = 0;

    // Starts a new episode. Environments with random initial conditions
    // draw from `rng`; deterministic ones leave it untouched.
    virtual void reset(Rng& rng) = 0;

    // Advances one step from the joint action (one entry per agent).
    // Throws UsageError on a finished episode or out-of-range action.
    virtual StepResult step(std::span<const int> joint_action) = 0;

    virtual std::vector<double> global_state() const = 0;
    virtual std::vector<double> observation(int agent) const = 0;

    // Every action is always available in all bundled environments.
    virtual std::vector<bool> available_actions(int agent) const;
};

// --- One-step matrix game -------------------------------------------------
//
// Two agents pick a row and a column of a square payoff table; the episode
// ends immediately with that payoff as the shared reward. The state and the
// observations are the constant scalar 0, so all value networks see a fixed
// input and the problem reduces to learning the table itself.

class MatrixGameEnv final : public Env {
public:
    // Throws ConfigError unless the payoff table is square and non-empty.
    explicit MatrixGameEnv(std::vector<std::vector<double>> payoff);

    int n_agents() const override { return 2; }
    int n_actions() const override { return static_cast<int>(payoff_.size()); }
    int state_dim() const override { return 1; }
    int obs_dim() const override { return 1; }

    void reset(Rng& rng) override;
    StepResult step(std::span<const int> joint_action) override;
    std::vector<double> global_state() const override;
    std::vector<double> observation(int agent) const override;

    const std::vector<std::vector<double>>& payoff() const { return payoff_; }

private:
    std::vector<std::vector<double>> payoff_;
    bool done_ = true;
};

// --- Grid-world navigation ------------------------------------------------
//
// Agents move on a small grid toward fixed landmarks. Discrete actions:
// 0 still, 1 up, 2 down, 3 left, 4 right; moves off the grid are clamped.
// If any two tentative positions coincide, or two agents swap cells, the
// whole move is reverted and the team earns -10 per colliding pair (with no
// distance reward that step). Otherwise each landmark contributes the sign
// of the change in its minimum Manhattan distance to any agent: +1 when the
// team got closer, -1 when it moved away, 0 when unchanged.

struct GridNavSpec {
    int rows = 2;
    int cols = 3;
    std::vector<std::pair<int, int>> agent_cells = {{0, 1}, {1, 1}};
    std::vector<std::pair<int, int>> landmark_cells = {{0, 0}, {1, 2}};
    int episode_limit = 25;
};

class GridNavEnv final : public Env {
public:
    explicit GridNavEnv(GridNavSpec spec = {});

    int n_agents() const override { return static_cast<int>(spec_.agent_cells.size()); }
    int n_actions() const override { return 5; }
    int state_dim() const override { return n_agents() * spec_.rows * spec_.cols; }
    int obs_dim() const override;

    void reset(Rng& rng) override;
    StepResult step(std::span<const int> joint_action) override;
    std::vector<double> global_state() const override;
    std::vector<double> observation(int agent) const override;

    const std::vector<std::pair<int, int>>& positions() const { return pos_; }

private:
    GridNavSpec spec_;
    std::vector<std::pair<int, int>> pos_;
    int steps_ = 0;
    bool done_ = true;
};

// --- Continuous particle navigation ----------------------------------------
//
// N point agents accelerate in a [-1,1]^2 arena to cover N landmarks.
// Velocity integrates damped acceleration, positions clamp to the arena.
// The shared reward per step is
//   ( -sum_l min_i ||p_i - l||  -  10 * overlapping pairs ) / N,
// where two agents overlap when their distance is below twice the body
// radius. Episodes run a fixed number of steps.

struct ParticleNavSpec {
    int n_agents = 3;
    int episode_limit = 25;
    double dt = 0.1;
    double damping = 0.25;
    double accel_gain = 5.0;
    double radius = 0.1;
};

class ParticleNavEnv final : public Env {
public:
    explicit ParticleNavEnv(ParticleNavSpec spec = {});

    int n_agents() const override { return spec_.n_agents; }
    int n_actions() const override { return 5; }
    int state_dim() const override { return 4 * spec_.n_agents + 2 * spec_.n_agents; }
    int obs_dim() const override { return 4 + 2 * spec_.n_agents + 2 * (spec_.n_agents - 1); }

    void reset(Rng& rng) override;
    StepResult step(std::span<const int> joint_action) override;
    std::vector<double> global_state() const override;
    std::vector<double> observation(int agent) const override;

    // Starts an episode from exact agent and landmark positions with zero
    // velocities. Probe hook for constructing specific scenes; both lists
    // must have n_agents entries inside the arena.
    void set_layout(std::span<const std::pair<double, double>> agents,
                    std::span<const std::pair<double, double>> landmarks);

    const ParticleNavSpec& spec() const { return spec_; }

private:
    ParticleNavSpec spec_;
    std::vector<double> px_, py_, vx_, vy_;
    std::vector<double> lx_, ly_;
    int steps_ = 0;
    bool done_ = true;
};

} // namespace mcvd
