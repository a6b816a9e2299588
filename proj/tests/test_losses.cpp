#include <doctest.h>

#include <cmath>
#include <vector>

#include "mcvd/errors.hpp"
#include "mcvd/losses.hpp"
#include "mcvd/rng.hpp"

using namespace mcvd;

namespace {

// High-precision reference constants.
constexpr double kExpNeg2 = 0.13533528323661269189;      // exp(-2)
constexpr double kFourExpNeg2 = 0.54134113294645076758;  // 4 exp(-2)
constexpr double kTwoExpNeg1 = 0.73575888234288464319;   // 2 exp(-1)
constexpr double kSqrt2 = 1.4142135623730950488;

} // namespace

TEST_CASE("kernel bandwidth validates positivity") {
    CHECK(KernelBandwidth(1.0).sigma == 1.0);
    CHECK(KernelBandwidth(0.3).sigma == 0.3);
    CHECK_THROWS_AS(KernelBandwidth(0.0), ConfigError);
    CHECK_THROWS_AS(KernelBandwidth(-1.0), ConfigError);
}

TEST_CASE("td_target closed forms") {
    CHECK(td_target(8.0, 0.99, true, 123.0) == 8.0);
    CHECK(td_target(0.0, 0.9, false, 10.0) == doctest::Approx(9.0).epsilon(1e-15));
    CHECK(td_target(5.0, 0.0, false, 77.0) == 5.0);
    CHECK(td_target(-3.0, 0.0, false, -1e9) == -3.0);
    CHECK(td_target(1.0, 0.5, false, 4.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK_THROWS_AS(td_target(0.0, -0.1, false, 0.0), ConfigError);
    CHECK_THROWS_AS(td_target(0.0, 1.5, false, 0.0), ConfigError);
}

TEST_CASE("mcvd_weight closed forms") {
    const KernelBandwidth one(1.0);
    CHECK(mcvd_weight(7.0, 7.0, one) == 1.0);
    CHECK(mcvd_weight(3.0, 7.0, one) == 1.0);
    CHECK(mcvd_weight(9.0, 7.0, one) == doctest::Approx(kExpNeg2).epsilon(1e-14));
    // Huge bandwidth: the weighting vanishes and MSE behaviour returns.
    CHECK(mcvd_weight(9.0, 7.0, KernelBandwidth(1e6)) == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("mcvd_weight one-edged monotonicity over random triples") {
    Rng rng(20260815);
    for (int i = 0; i < 10000; ++i) {
        const double y = rng.uniform(-20.0, 20.0);
        const double sigma = rng.uniform(0.5, 10.0);
        const KernelBandwidth kernel(sigma);

        // Below or at the target: always exactly 1.
        const double under = y - rng.uniform(0.0, 15.0);
        CHECK(mcvd_weight(under, y, kernel) == 1.0);

        // Above the target: in (0,1], non-increasing as the error grows.
        // Errors are capped at 10 sigma so exp stays clear of underflow;
        // beyond roughly 38 sigma the true value rounds to +0.0.
        const double e1 = rng.uniform(0.0, 5.0 * sigma);
        const double e2 = e1 + rng.uniform(0.0, 5.0 * sigma);
        const double w1 = mcvd_weight(y + e1, y, kernel);
        const double w2 = mcvd_weight(y + e2, y, kernel);
        CHECK(w1 > 0.0);
        CHECK(w1 <= 1.0);
        CHECK(w2 <= w1);
    }

    // Far past the representable range the weight underflows to exactly
    // zero — the correct limit of a vanishing contribution.
    CHECK(mcvd_weight(100.0, 0.0, KernelBandwidth(1.0)) == 0.0);
}

TEST_CASE("mcvd_td_loss closed forms") {
    const KernelBandwidth one(1.0);

    SUBCASE("zero error") {
        const std::vector<double> q{7.0};
        const std::vector<double> y{7.0};
        const TdLoss r = mcvd_td_loss(q, y, one);
        CHECK(r.loss == 0.0);
        CHECK(r.grad_q[0] == 0.0);
    }
    SUBCASE("underestimate keeps full weight") {
        const std::vector<double> q{5.0};
        const std::vector<double> y{7.0};
        const TdLoss r = mcvd_td_loss(q, y, one);
        CHECK(r.loss == doctest::Approx(4.0).epsilon(1e-15));
        CHECK(r.grad_q[0] == doctest::Approx(-4.0).epsilon(1e-15));
    }
    SUBCASE("overestimate is suppressed") {
        const std::vector<double> q{9.0};
        const std::vector<double> y{7.0};
        const TdLoss r = mcvd_td_loss(q, y, one);
        CHECK(r.loss == doctest::Approx(kFourExpNeg2).epsilon(1e-14));
        CHECK(r.grad_q[0] == doctest::Approx(kFourExpNeg2).epsilon(1e-14));
    }
    SUBCASE("batch mean over mixed samples") {
        const std::vector<double> q{5.0, 9.0};
        const std::vector<double> y{7.0, 7.0};
        const TdLoss r = mcvd_td_loss(q, y, one);
        CHECK(r.loss == doctest::Approx((4.0 + kFourExpNeg2) / 2.0).epsilon(1e-14));
        CHECK(r.grad_q[0] == doctest::Approx(-2.0).epsilon(1e-15));
        CHECK(r.grad_q[1] == doctest::Approx(kFourExpNeg2 / 2.0).epsilon(1e-14));
    }
    SUBCASE("empty batch rejected") {
        const std::vector<double> empty;
        CHECK_THROWS_AS(mcvd_td_loss(empty, empty, one), UsageError);
    }
    SUBCASE("size mismatch rejected") {
        const std::vector<double> q{1.0, 2.0};
        const std::vector<double> y{1.0};
        CHECK_THROWS_AS(mcvd_td_loss(q, y, one), UsageError);
    }
}

TEST_CASE("mcvd_td_loss degrades to MSE as sigma grows") {
    Rng rng(99);
    std::vector<double> q(64), y(64);
    for (std::size_t i = 0; i < q.size(); ++i) {
        q[i] = rng.uniform(-5.0, 5.0);
        y[i] = rng.uniform(-5.0, 5.0);
    }
    const TdLoss wide = mcvd_td_loss(q, y, KernelBandwidth(1e6));
    const TdLoss mse = joint_approx_loss(q, y);
    CHECK(std::abs(wide.loss - mse.loss) < 1e-6);
    for (std::size_t i = 0; i < q.size(); ++i) {
        CHECK(std::abs(wide.grad_q[i] - mse.grad_q[i]) < 1e-6);
    }
}

TEST_CASE("mcvd gradient treats the weight as a constant") {
    // The analytic gradient must match finite differences of the loss with the
    // weight FROZEN at its base value. An end-to-end derivative that also
    // differentiates the weight would flip the sign at e = 2, sigma = 1:
    //   frozen:      d/dq [w (q-y)^2]          = 2 w e        = +4 exp(-2)
    //   end-to-end:  d/dq [exp(-e^2/2) (q-y)^2] = w e (2 - e^2) = -4 exp(-2)
    const KernelBandwidth one(1.0);
    const std::vector<double> q{9.0};
    const std::vector<double> y{7.0};
    const TdLoss r = mcvd_td_loss(q, y, one);

    const double w_frozen = mcvd_weight(q[0], y[0], one);
    const double h = 1e-6;
    const auto frozen_loss = [&](double qq) {
        const double e = qq - y[0];
        return w_frozen * e * e;
    };
    const double fd_frozen = (frozen_loss(q[0] + h) - frozen_loss(q[0] - h)) / (2.0 * h);
    CHECK(r.grad_q[0] == doctest::Approx(fd_frozen).epsilon(1e-8));

    const auto full_loss = [&](double qq) {
        const double e = qq - y[0];
        return mcvd_weight(qq, y[0], one) * e * e;
    };
    const double fd_full = (full_loss(q[0] + h) - full_loss(q[0] - h)) / (2.0 * h);
    CHECK(fd_full == doctest::Approx(-kFourExpNeg2).epsilon(1e-6));
    CHECK(r.grad_q[0] > 0.0);
    CHECK(fd_full < 0.0);
}

TEST_CASE("per-sample extremum locations") {
    // Scan the overestimation error axis for several bandwidths. The
    // suppressed-square term w(e) e^2 peaks at e = sigma sqrt(2); the
    // frozen-weight gradient magnitude 2 w(e) e peaks at e = sigma.
    for (const double sigma : {0.5, 1.0, 2.0, 5.0}) {
        const KernelBandwidth kernel(sigma);
        double best_loss_e = 0.0, best_loss = -1.0;
        double best_grad_e = 0.0, best_grad = -1.0;
        const double step = sigma / 2000.0;
        for (double e = step; e <= 4.0 * sigma; e += step) {
            const std::vector<double> q{e};
            const std::vector<double> y{0.0};
            const TdLoss r = mcvd_td_loss(q, y, kernel);
            if (r.loss > best_loss) {
                best_loss = r.loss;
                best_loss_e = e;
            }
            const double g = std::abs(r.grad_q[0]);
            if (g > best_grad) {
                best_grad = g;
                best_grad_e = e;
            }
        }
        CHECK(best_loss_e == doctest::Approx(sigma * kSqrt2).epsilon(0.01));
        CHECK(best_grad_e == doctest::Approx(sigma).epsilon(0.01));

        // Past the peak the pull keeps shrinking: outliers lose influence.
        const std::vector<double> q_far{3.0 * sigma};
        const std::vector<double> q_peak{sigma};
        const std::vector<double> y0{0.0};
        CHECK(std::abs(mcvd_td_loss(q_far, y0, kernel).grad_q[0]) <
              std::abs(mcvd_td_loss(q_peak, y0, kernel).grad_q[0]));
    }
}

TEST_CASE("ow_weight closed forms and validation") {
    CHECK(ow_weight(5.0, 6.0, 0.1) == 1.0);
    CHECK(ow_weight(6.0, 5.0, 0.1) == 0.1);
    CHECK(ow_weight(5.0, 5.0, 0.5) == 0.5); // equality falls in the alpha branch
    CHECK(ow_weight(5.0, 6.0, 1.0) == 1.0);
    CHECK_THROWS_AS(ow_weight(0.0, 0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(ow_weight(0.0, 0.0, -0.5), ConfigError);
    CHECK_THROWS_AS(ow_weight(0.0, 0.0, 1.5), ConfigError);
}

TEST_CASE("weighted_td_loss closed forms") {
    SUBCASE("alpha one reduces to plain MSE") {
        Rng rng(7);
        std::vector<double> q(32), y(32);
        for (std::size_t i = 0; i < q.size(); ++i) {
            q[i] = rng.uniform(-3.0, 3.0);
            y[i] = rng.uniform(-3.0, 3.0);
        }
        const TdLoss a = weighted_td_loss(q, y, 1.0);
        const TdLoss b = joint_approx_loss(q, y);
        CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-15));
        for (std::size_t i = 0; i < q.size(); ++i) {
            CHECK(a.grad_q[i] == doctest::Approx(b.grad_q[i]).epsilon(1e-15));
        }
    }
    SUBCASE("overestimate scaled by alpha") {
        const std::vector<double> q{9.0};
        const std::vector<double> y{7.0};
        const TdLoss half = weighted_td_loss(q, y, 0.5);
        CHECK(half.loss == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(std::abs(half.grad_q[0]) == doctest::Approx(2.0).epsilon(1e-15));
        const TdLoss tiny = weighted_td_loss(q, y, 0.001);
        CHECK(std::abs(tiny.grad_q[0]) == doctest::Approx(0.004).epsilon(1e-12));
    }
    SUBCASE("gradient magnitude grows without bound in the error") {
        double prev = 0.0;
        for (double e = 1.0; e <= 1024.0; e *= 2.0) {
            const std::vector<double> q{e};
            const std::vector<double> y{0.0};
            const double g = std::abs(weighted_td_loss(q, y, 0.1).grad_q[0]);
            CHECK(g > prev);
            prev = g;
        }
    }
    SUBCASE("empty batch and bad alpha rejected") {
        const std::vector<double> empty;
        CHECK_THROWS_AS(weighted_td_loss(empty, empty, 0.5), UsageError);
        const std::vector<double> one{1.0};
        CHECK_THROWS_AS(weighted_td_loss(one, one, 0.0), ConfigError);
    }
}

TEST_CASE("joint_approx_loss closed forms and finite differences") {
    SUBCASE("exact fits and the two-sample mean") {
        const std::vector<double> y{2.0, 2.0};
        CHECK(joint_approx_loss(y, y).loss == 0.0);
        const std::vector<double> q{1.0, 3.0};
        const TdLoss r = joint_approx_loss(q, y);
        CHECK(r.loss == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(r.grad_q[0] == doctest::Approx(-1.0).epsilon(1e-15));
        CHECK(r.grad_q[1] == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("gradient matches central differences") {
        Rng rng(11);
        std::vector<double> q(16), y(16);
        for (std::size_t i = 0; i < q.size(); ++i) {
            q[i] = rng.uniform(-4.0, 4.0);
            y[i] = rng.uniform(-4.0, 4.0);
        }
        const TdLoss r = joint_approx_loss(q, y);
        const double h = 1e-5;
        for (std::size_t i = 0; i < q.size(); ++i) {
            std::vector<double> qp = q, qm = q;
            qp[i] += h;
            qm[i] -= h;
            const double fd =
                (joint_approx_loss(qp, y).loss - joint_approx_loss(qm, y).loss) / (2.0 * h);
            const double rel = std::abs(r.grad_q[i] - fd) / std::max(1.0, std::abs(fd));
            CHECK(rel < 1e-7);
        }
    }
    SUBCASE("empty batch rejected") {
        const std::vector<double> empty;
        CHECK_THROWS_AS(joint_approx_loss(empty, empty), UsageError);
    }
}

TEST_CASE("mcc_sample_correntropy closed forms") {
    const KernelBandwidth one(1.0);
    const std::vector<double> zeros{0.0, 0.0, 0.0};
    CHECK(mcc_sample_correntropy(zeros, one) == doctest::Approx(2.0).epsilon(1e-15));

    const std::vector<double> root2{kSqrt2};
    CHECK(mcc_sample_correntropy(root2, one) ==
          doctest::Approx(kTwoExpNeg1).epsilon(1e-14));

    // Any perturbation away from all-zero errors lowers the estimate.
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> e(8, 0.0);
        e[rng.uniform_int(8)] = rng.uniform(-4.0, 4.0);
        bool all_zero = true;
        for (double v : e) {
            all_zero = all_zero && v == 0.0;
        }
        if (!all_zero) {
            CHECK(mcc_sample_correntropy(e, one) < 2.0);
        }
    }

    const std::vector<double> empty;
    CHECK_THROWS_AS(mcc_sample_correntropy(empty, one), UsageError);
}
