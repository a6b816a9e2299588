#pragma once

#include <span>
#include <vector>

namespace mcvd {

// Gaussian kernel bandwidth for the correntropy-derived weighting.
// Construction validates positivity once so call sites cannot forget.
struct KernelBandwidth {
    explicit KernelBandwidth(double s);
    double sigma;
};

// One-step bootstrapped target  y = r + gamma * (1 - terminal) * q_next.
// Terminal transitions ignore q_next entirely.
double td_target(double reward, double gamma, bool terminal, double q_next_target);

// Overestimation-gated Gaussian weight
//   w = exp(-max(0, q_jt - y)^2 / (2 sigma^2)).
// Underestimates (q_jt <= y) keep full weight 1; overestimates decay
// smoothly toward 0. The weight is a constant during backpropagation.
double mcvd_weight(double q_jt, double y, KernelBandwidth kernel);

// Hard two-level weight: 1 when q_jt < y (underestimate), alpha otherwise.
// alpha = 1 recovers the plain unweighted objective.
double ow_weight(double q_jt, double y, double alpha);

// Weighted mean-squared TD loss over a batch, with the per-sample gradient
// dL/dq_k computed under the weights-held-constant convention:
//   L = (1/M) sum_k w_k (q_k - y_k)^2,   dL/dq_k = 2 w_k (q_k - y_k) / M.
struct TdLoss {
    double loss = 0.0;
    std::vector<double> grad_q;
};

TdLoss mcvd_td_loss(std::span<const double> q_jt, std::span<const double> y,
                    KernelBandwidth kernel);
TdLoss weighted_td_loss(std::span<const double> q_jt, std::span<const double> y,
                        double alpha);

// Unweighted mean-squared error for the joint approximation network.
TdLoss joint_approx_loss(std::span<const double> q_hat, std::span<const double> y);

// Sample correntropy of an error batch:
//   (2 sigma^2 / M) sum_k exp(-e_k^2 / (2 sigma^2)).
// The 2 sigma^2 prefactor normalizes the gradient scale. Two-sided
// diagnostic (no overestimation gate); maximized at all-zero errors.
double mcc_sample_correntropy(std::span<const double> errors, KernelBandwidth kernel);

} // namespace mcvd
