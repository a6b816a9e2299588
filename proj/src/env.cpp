#include "mcvd/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mcvd/errors.hpp"

namespace mcvd {

namespace {

void check_joint_action(std::span<const int> joint_action, int n_agents,
                        int n_actions, bool done) {
    if (done) {
        throw UsageError("step on a finished episode; call reset first");
    }
    if (static_cast<int>(joint_action.size()) != n_agents) {
        throw UsageError("joint action has " + std::to_string(joint_action.size()) +
                         " entries for " + std::to_string(n_agents) + " agents");
    }
    for (int a : joint_action) {
        if (a < 0 || a >= n_actions) {
            throw UsageError("action index " + std::to_string(a) +
                             " outside [0, " + std::to_string(n_actions) + ")");
        }
    }
}

// Shared direction table: 0 still, 1 up, 2 down, 3 left, 4 right.
constexpr int kDr[5] = {0, -1, 1, 0, 0};
constexpr int kDc[5] = {0, 0, 0, -1, 1};
constexpr double kDx[5] = {0.0, 0.0, 0.0, -1.0, 1.0};
constexpr double kDy[5] = {0.0, 1.0, -1.0, 0.0, 0.0};

int sign_of(int v) { return (v > 0) - (v < 0); }

} // namespace

std::vector<bool> Env::available_actions(int agent) const {
    if (agent < 0 || agent >= n_agents()) {
        throw UsageError("agent index " + std::to_string(agent) + " outside [0, " +
                         std::to_string(n_agents()) + ")");
    }
    return std::vector<bool>(static_cast<std::size_t>(n_actions()), true);
}

// --- MatrixGameEnv ----------------------------------------------------------

MatrixGameEnv::MatrixGameEnv(std::vector<std::vector<double>> payoff)
    : payoff_(std::move(payoff)) {
    if (payoff_.empty()) {
        throw ConfigError("payoff table is empty");
    }
    for (const auto& row : payoff_) {
        if (row.size() != payoff_.size()) {
            throw ConfigError("payoff table must be square: " +
                              std::to_string(payoff_.size()) + " rows but a row of " +
                              std::to_string(row.size()) + " entries");
        }
    }
}

void MatrixGameEnv::reset(Rng&) {
    done_ = false;
}

StepResult MatrixGameEnv::step(std::span<const int> joint_action) {
    check_joint_action(joint_action, n_agents(), n_actions(), done_);
    done_ = true;
    return {payoff_[static_cast<std::size_t>(joint_action[0])]
                   [static_cast<std::size_t>(joint_action[1])],
            true};
}

std::vector<double> MatrixGameEnv::global_state() const {
    return {0.0};
}

std::vector<double> MatrixGameEnv::observation(int agent) const {
    if (agent < 0 || agent >= n_agents()) {
        throw UsageError("agent index out of range");
    }
    return {0.0};
}

// --- GridNavEnv -------------------------------------------------------------

GridNavEnv::GridNavEnv(GridNavSpec spec) : spec_(std::move(spec)) {
    if (spec_.rows < 1 || spec_.cols < 1) {
        throw ConfigError("grid must have at least one row and one column");
    }
    if (spec_.agent_cells.empty() || spec_.landmark_cells.empty()) {
        throw ConfigError("grid navigation needs at least one agent and one landmark");
    }
    if (spec_.episode_limit < 1) {
        throw ConfigError("episode limit must be at least 1");
    }
    auto in_grid = [&](const std::pair<int, int>& cell) {
        return cell.first >= 0 && cell.first < spec_.rows && cell.second >= 0 &&
               cell.second < spec_.cols;
    };
    for (const auto& cell : spec_.agent_cells) {
        if (!in_grid(cell)) throw ConfigError("agent start cell outside the grid");
    }
    for (const auto& cell : spec_.landmark_cells) {
        if (!in_grid(cell)) throw ConfigError("landmark cell outside the grid");
    }
    for (std::size_t i = 0; i < spec_.agent_cells.size(); ++i) {
        for (std::size_t j = i + 1; j < spec_.agent_cells.size(); ++j) {
            if (spec_.agent_cells[i] == spec_.agent_cells[j]) {
                throw ConfigError("agent start cells must be distinct");
            }
        }
    }
}

int GridNavEnv::obs_dim() const {
    return 2 + 2 * static_cast<int>(spec_.landmark_cells.size()) + 2 * (n_agents() - 1);
}

void GridNavEnv::reset(Rng&) {
    pos_ = spec_.agent_cells;
    steps_ = 0;
    done_ = false;
}

StepResult GridNavEnv::step(std::span<const int> joint_action) {
    check_joint_action(joint_action, n_agents(), n_actions(), done_);

    const int n = n_agents();
    std::vector<std::pair<int, int>> tentative(pos_);
    for (int i = 0; i < n; ++i) {
        const int a = joint_action[i];
        tentative[i].first = std::clamp(pos_[i].first + kDr[a], 0, spec_.rows - 1);
        tentative[i].second = std::clamp(pos_[i].second + kDc[a], 0, spec_.cols - 1);
    }

    // Collisions: two agents landing on the same cell, or exchanging cells.
    int colliding_pairs = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const bool shared = tentative[i] == tentative[j];
            const bool swapped = tentative[i] == pos_[j] && tentative[j] == pos_[i];
            if (shared || swapped) {
                ++colliding_pairs;
            }
        }
    }

    double reward = 0.0;
    if (colliding_pairs > 0) {
        reward = -10.0 * colliding_pairs; // everyone stays put
    } else {
        for (const auto& lm : spec_.landmark_cells) {
            auto min_dist = [&](const std::vector<std::pair<int, int>>& cells) {
                int best = std::abs(cells[0].first - lm.first) +
                           std::abs(cells[0].second - lm.second);
                for (const auto& c : cells) {
                    best = std::min(best, std::abs(c.first - lm.first) +
                                              std::abs(c.second - lm.second));
                }
                return best;
            };
            reward += sign_of(min_dist(pos_) - min_dist(tentative));
        }
        pos_ = tentative;
    }

    ++steps_;
    done_ = steps_ >= spec_.episode_limit;
    return {reward, done_};
}

std::vector<double> GridNavEnv::global_state() const {
    // One-hot cell per agent, agents concatenated in order.
    std::vector<double> state(static_cast<std::size_t>(state_dim()), 0.0);
    const int cells = spec_.rows * spec_.cols;
    for (int i = 0; i < n_agents(); ++i) {
        state[static_cast<std::size_t>(i * cells + pos_[i].first * spec_.cols +
                                       pos_[i].second)] = 1.0;
    }
    return state;
}

std::vector<double> GridNavEnv::observation(int agent) const {
    if (agent < 0 || agent >= n_agents()) {
        throw UsageError("agent index out of range");
    }
    const double rs = std::max(spec_.rows - 1, 1);
    const double cs = std::max(spec_.cols - 1, 1);
    std::vector<double> obs;
    obs.reserve(static_cast<std::size_t>(obs_dim()));
    obs.push_back(pos_[agent].first / rs);
    obs.push_back(pos_[agent].second / cs);
    for (const auto& lm : spec_.landmark_cells) {
        obs.push_back((lm.first - pos_[agent].first) / rs);
        obs.push_back((lm.second - pos_[agent].second) / cs);
    }
    for (int j = 0; j < n_agents(); ++j) {
        if (j == agent) continue;
        obs.push_back((pos_[j].first - pos_[agent].first) / rs);
        obs.push_back((pos_[j].second - pos_[agent].second) / cs);
    }
    return obs;
}

// --- ParticleNavEnv ---------------------------------------------------------

ParticleNavEnv::ParticleNavEnv(ParticleNavSpec spec) : spec_(spec) {
    if (spec_.n_agents < 1) {
        throw ConfigError("particle navigation needs at least one agent");
    }
    if (spec_.episode_limit < 1) {
        throw ConfigError("episode limit must be at least 1");
    }
    if (!(spec_.dt > 0.0)) {
        throw ConfigError("dt must be positive");
    }
    if (!(spec_.damping >= 0.0 && spec_.damping < 1.0)) {
        throw ConfigError("damping must lie in [0, 1)");
    }
    if (!(spec_.radius > 0.0)) {
        throw ConfigError("radius must be positive");
    }
}

void ParticleNavEnv::reset(Rng& rng) {
    const std::size_t n = static_cast<std::size_t>(spec_.n_agents);
    px_.resize(n);
    py_.resize(n);
    vx_.assign(n, 0.0);
    vy_.assign(n, 0.0);
    lx_.resize(n);
    ly_.resize(n);
    // Agents first, then landmarks; each as (x, y). The draw order is part
    // of the reproducibility contract.
    for (std::size_t i = 0; i < n; ++i) {
        px_[i] = rng.uniform(-1.0, 1.0);
        py_[i] = rng.uniform(-1.0, 1.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        lx_[i] = rng.uniform(-1.0, 1.0);
        ly_[i] = rng.uniform(-1.0, 1.0);
    }
    steps_ = 0;
    done_ = false;
}

void ParticleNavEnv::set_layout(std::span<const std::pair<double, double>> agents,
                                std::span<const std::pair<double, double>> landmarks) {
    const std::size_t n = static_cast<std::size_t>(spec_.n_agents);
    if (agents.size() != n || landmarks.size() != n) {
        throw UsageError("layout needs exactly " + std::to_string(n) +
                         " agent and landmark positions");
    }
    auto in_arena = [](const std::pair<double, double>& p) {
        return p.first >= -1.0 && p.first <= 1.0 && p.second >= -1.0 && p.second <= 1.0;
    };
    for (const auto& p : agents) {
        if (!in_arena(p)) throw UsageError("agent position outside the arena");
    }
    for (const auto& p : landmarks) {
        if (!in_arena(p)) throw UsageError("landmark position outside the arena");
    }
    px_.resize(n);
    py_.resize(n);
    vx_.assign(n, 0.0);
    vy_.assign(n, 0.0);
    lx_.resize(n);
    ly_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        px_[i] = agents[i].first;
        py_[i] = agents[i].second;
        lx_[i] = landmarks[i].first;
        ly_[i] = landmarks[i].second;
    }
    steps_ = 0;
    done_ = false;
}

StepResult ParticleNavEnv::step(std::span<const int> joint_action) {
    check_joint_action(joint_action, n_agents(), n_actions(), done_);

    const int n = spec_.n_agents;
    for (int i = 0; i < n; ++i) {
        const int a = joint_action[i];
        vx_[i] = (1.0 - spec_.damping) * vx_[i] + spec_.accel_gain * kDx[a] * spec_.dt;
        vy_[i] = (1.0 - spec_.damping) * vy_[i] + spec_.accel_gain * kDy[a] * spec_.dt;
        px_[i] = std::clamp(px_[i] + vx_[i] * spec_.dt, -1.0, 1.0);
        py_[i] = std::clamp(py_[i] + vy_[i] * spec_.dt, -1.0, 1.0);
    }

    double coverage = 0.0;
    for (int l = 0; l < n; ++l) {
        double best = std::hypot(px_[0] - lx_[l], py_[0] - ly_[l]);
        for (int i = 1; i < n; ++i) {
            best = std::min(best, std::hypot(px_[i] - lx_[l], py_[i] - ly_[l]));
        }
        coverage += best;
    }
    int overlaps = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (std::hypot(px_[i] - px_[j], py_[i] - py_[j]) < 2.0 * spec_.radius) {
                ++overlaps;
            }
        }
    }
    const double reward = (-coverage - 10.0 * overlaps) / static_cast<double>(n);

    ++steps_;
    done_ = steps_ >= spec_.episode_limit;
    return {reward, done_};
}

std::vector<double> ParticleNavEnv::global_state() const {
    std::vector<double> state;
    state.reserve(static_cast<std::size_t>(state_dim()));
    for (int i = 0; i < spec_.n_agents; ++i) {
        state.push_back(px_[i]);
        state.push_back(py_[i]);
        state.push_back(vx_[i]);
        state.push_back(vy_[i]);
    }
    for (int l = 0; l < spec_.n_agents; ++l) {
        state.push_back(lx_[l]);
        state.push_back(ly_[l]);
    }
    return state;
}

std::vector<double> ParticleNavEnv::observation(int agent) const {
    if (agent < 0 || agent >= spec_.n_agents) {
        throw UsageError("agent index out of range");
    }
    std::vector<double> obs;
    obs.reserve(static_cast<std::size_t>(obs_dim()));
    obs.push_back(px_[agent]);
    obs.push_back(py_[agent]);
    obs.push_back(vx_[agent]);
    obs.push_back(vy_[agent]);
    for (int l = 0; l < spec_.n_agents; ++l) {
        obs.push_back(lx_[l] - px_[agent]);
        obs.push_back(ly_[l] - py_[agent]);
    }
    for (int j = 0; j < spec_.n_agents; ++j) {
        if (j == agent) continue;
        obs.push_back(px_[j] - px_[agent]);
        obs.push_back(py_[j] - py_[agent]);
    }
    return obs;
}

} // namespace mcvd
