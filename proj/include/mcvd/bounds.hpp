#pragma once

#include <span>

namespace mcvd {

// Inputs to the closed-form hyperparameter bounds derived for the one-step
// optimality-preservation analysis.
struct BoundInputs {
    double delta_s = 0.0;  // optimality gap, > 0
    double gamma = 0.0;    // discount, in [0, 1)
    double r_max = 0.0;    // reward magnitude bound, > 0
    int n_actions = 0;     // per-agent action count, >= 1
    int n_agents = 0;      // agent count, >= 1
};

// Gap between the best and second-best joint values. Throws UsageError when
// all values are equal (the gap is undefined) and on an empty span.
double delta_s(std::span<const double> joint_values);

// |A|^N as a double. Throws std::range_error when the count overflows the
// double's exactly-representable integer range.
double joint_action_count(int n_actions, int n_agents);

// Largest alpha for which the hard two-level weighting provably preserves
// the optimal joint action:  alpha < delta_s^2 (1-gamma)^2 / (R_max^2 |A|^N).
double alpha_bound(const BoundInputs& in);

// Largest sigma for which the Gaussian weighting provably suppresses
// overestimation of the optimality gap:  sigma < delta_s * sqrt(e / (2 |A|^N)).
double sigma_bound(double delta_s, int n_actions, int n_agents);

} // namespace mcvd
