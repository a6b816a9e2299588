#include "mcvd/bounds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mcvd/errors.hpp"

namespace mcvd {

double delta_s(std::span<const double> joint_values) {
    if (joint_values.empty()) {
        throw UsageError("optimality gap of an empty value table");
    }
    double best = joint_values[0];
    for (double v : joint_values) {
        best = std::max(best, v);
    }
    bool found = false;
    double second = 0.0;
    for (double v : joint_values) {
        if (v < best && (!found || v > second)) {
            second = v;
            found = true;
        }
    }
    if (!found) {
        throw UsageError("optimality gap undefined: all joint values are equal");
    }
    return best - second;
}

double joint_action_count(int n_actions, int n_agents) {
    if (n_actions < 1 || n_agents < 1) {
        throw ConfigError("joint action count needs n_actions >= 1 and n_agents >= 1");
    }
    const double count = std::pow(static_cast<double>(n_actions),
                                  static_cast<double>(n_agents));
    // Beyond 2^53 consecutive integers are no longer representable, so the
    // count would silently lose precision.
    if (!(count <= 9007199254740992.0)) {
        throw std::range_error("joint action count " + std::to_string(n_actions) +
                               "^" + std::to_string(n_agents) +
                               " exceeds the exactly representable range");
    }
    return count;
}

double alpha_bound(const BoundInputs& in) {
    if (!(in.delta_s > 0.0)) {
        throw ConfigError("delta_s must be > 0 (got " + std::to_string(in.delta_s) + ")");
    }
    if (!(in.gamma >= 0.0 && in.gamma < 1.0)) {
        throw ConfigError("gamma must lie in [0, 1) (got " + std::to_string(in.gamma) + ")");
    }
    if (!(in.r_max > 0.0)) {
        throw ConfigError("r_max must be > 0 (got " + std::to_string(in.r_max) + ")");
    }
    const double combos = joint_action_count(in.n_actions, in.n_agents);
    const double gap = in.delta_s * (1.0 - in.gamma);
    return (gap * gap) / (in.r_max * in.r_max * combos);
}

double sigma_bound(double delta_s, int n_actions, int n_agents) {
    if (!(delta_s > 0.0)) {
        throw ConfigError("delta_s must be > 0 (got " + std::to_string(delta_s) + ")");
    }
    const double combos = joint_action_count(n_actions, n_agents);
    return delta_s * std::sqrt(std::exp(1.0) / (2.0 * combos));
}

} // namespace mcvd
