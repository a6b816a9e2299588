#include "mcvd/losses.hpp"

#include <cmath>
#include <string>

#include "mcvd/errors.hpp"

namespace mcvd {

namespace {

void check_batch(std::span<const double> q, std::span<const double> y) {
    if (q.empty()) {
        throw UsageError("loss over an empty batch");
    }
    if (q.size() != y.size()) {
        throw UsageError("batch size mismatch: " + std::to_string(q.size()) +
                         " predictions vs " + std::to_string(y.size()) + " targets");
    }
}

} // namespace

KernelBandwidth::KernelBandwidth(double s) : sigma(s) {
    if (!(s > 0.0)) {
        throw ConfigError("sigma must be > 0 (got " + std::to_string(s) + ")");
    }
}

double td_target(double reward, double gamma, bool terminal, double q_next_target) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw ConfigError("gamma must lie in [0, 1] (got " + std::to_string(gamma) + ")");
    }
    return terminal ? reward : reward + gamma * q_next_target;
}

double mcvd_weight(double q_jt, double y, KernelBandwidth kernel) {
    const double over = q_jt - y;
    if (over <= 0.0) {
        return 1.0;
    }
    return std::exp(-(over * over) / (2.0 * kernel.sigma * kernel.sigma));
}

double ow_weight(double q_jt, double y, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw ConfigError("alpha must lie in (0, 1] (got " + std::to_string(alpha) + ")");
    }
    return q_jt < y ? 1.0 : alpha;
}

namespace {

template <typename WeightFn>
TdLoss weighted_loss(std::span<const double> q, std::span<const double> y,
                     WeightFn weight) {
    check_batch(q, y);
    const double inv_m = 1.0 / static_cast<double>(q.size());
    TdLoss result;
    result.grad_q.resize(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double e = q[k] - y[k];
        const double w = weight(q[k], y[k]);
        result.loss += w * e * e * inv_m;
        result.grad_q[k] = 2.0 * w * e * inv_m;
    }
    return result;
}

} // namespace

TdLoss mcvd_td_loss(std::span<const double> q_jt, std::span<const double> y,
                    KernelBandwidth kernel) {
    return weighted_loss(q_jt, y, [kernel](double q, double t) {
        return mcvd_weight(q, t, kernel);
    });
}

TdLoss weighted_td_loss(std::span<const double> q_jt, std::span<const double> y,
                        double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw ConfigError("alpha must lie in (0, 1] (got " + std::to_string(alpha) + ")");
    }
    return weighted_loss(q_jt, y, [alpha](double q, double t) {
        return q < t ? 1.0 : alpha;
    });
}

TdLoss joint_approx_loss(std::span<const double> q_hat, std::span<const double> y) {
    return weighted_loss(q_hat, y, [](double, double) { return 1.0; });
}

double mcc_sample_correntropy(std::span<const double> errors, KernelBandwidth kernel) {
    if (errors.empty()) {
        throw UsageError("correntropy over an empty batch");
    }
    const double two_sigma_sq = 2.0 * kernel.sigma * kernel.sigma;
    double acc = 0.0;
    for (double e : errors) {
        acc += std::exp(-(e * e) / two_sigma_sq);
    }
    return two_sigma_sq * acc / static_cast<double>(errors.size());
}

} // namespace mcvd
