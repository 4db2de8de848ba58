#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ucso/msv/portfolio.hpp"
#include "ucso/rng.hpp"

using namespace ucso;
using namespace ucso::msv;

namespace {

double rel_err(double got, double want, double floor = 1e-2) {
    return std::abs(got - want) / std::max(std::abs(want), floor);
}

}  // namespace

TEST_CASE("softmax: uniform at zero logits, positive, sums to one") {
    Eigen::VectorXd w = softmax_weights(Eigen::VectorXd::Zero(5));
    for (int i = 0; i < 5; ++i) CHECK(w(i) == doctest::Approx(0.2).epsilon(1e-14));

    RngStream rng(1);
    for (int rep = 0; rep < 100; ++rep) {
        Eigen::VectorXd xi(4);
        for (int i = 0; i < 4; ++i) xi(i) = 5.0 * rng.normal();
        Eigen::VectorXd v = softmax_weights(xi);
        CHECK(v.minCoeff() > 0.0);
        CHECK(v.sum() == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("softmax is invariant to a common logit shift and robust to huge logits") {
    Eigen::VectorXd xi(3);
    xi << 0.2, -1.0, 0.5;
    Eigen::VectorXd a = softmax_weights(xi);
    Eigen::VectorXd b = softmax_weights(xi.array() + 1234.5);
    for (int i = 0; i < 3; ++i) CHECK(a(i) == doctest::Approx(b(i)).epsilon(1e-13));

    Eigen::VectorXd huge(2);
    huge << 800.0, -800.0;  // would overflow exp without the max shift
    Eigen::VectorXd w = softmax_weights(huge);
    CHECK(w(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(w.allFinite());
}

TEST_CASE("softmax jacobian: analytic form, zero row sums, finite differences") {
    RngStream rng(2);
    const double h = 1e-6;
    for (int rep = 0; rep < 50; ++rep) {
        Eigen::VectorXd xi(4);
        for (int i = 0; i < 4; ++i) xi(i) = 2.0 * rng.normal();
        Eigen::MatrixXd j = softmax_jacobian(xi);
        Eigen::VectorXd w = softmax_weights(xi);
        // J_{ab} = w_a (delta_{ab} - w_b), rows sum to zero
        for (int a = 0; a < 4; ++a) {
            CHECK(std::abs(j.row(a).sum()) < 1e-14);
            for (int b = 0; b < 4; ++b)
                CHECK(j(a, b) ==
                      doctest::Approx(w(a) * ((a == b ? 1.0 : 0.0) - w(b))).epsilon(1e-12));
        }
        for (int b = 0; b < 4; ++b) {
            Eigen::VectorXd hi = xi, lo = xi;
            hi(b) += h;
            lo(b) -= h;
            Eigen::VectorXd fd = (softmax_weights(hi) - softmax_weights(lo)) / (2 * h);
            // d w_a / d xi_b is column b of J
            for (int a = 0; a < 4; ++a) CHECK(std::abs(j(a, b) - fd(a)) < 1e-8);
        }
    }
}

TEST_CASE("payoff with zeta = 0 is the average portfolio return") {
    Eigen::MatrixXd r(2, 3);
    r << 0.01, -0.02, 0.03, 0.00, 0.04, -0.01;
    Eigen::VectorXd w(2);
    w << 0.25, 0.75;
    Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(2, 3);
    double want = 0.0;
    for (int t = 0; t < 3; ++t) want += w.dot(r.col(t)) / 3.0;
    CHECK(payoff_g(r, zeros, zeros, w, 0.0) == doctest::Approx(want).epsilon(1e-15));
    CHECK_THROWS_AS((void)payoff_g(Eigen::MatrixXd(2, 0), zeros, zeros, w, 0.0),
                    std::invalid_argument);
}

TEST_CASE("payoff hand-computed at p = 2, horizon 1") {
    Eigen::MatrixXd r(2, 1), ma(2, 1), mb(2, 1);
    r << 0.05, -0.02;
    ma << 0.01, 0.00;
    mb << 0.02, -0.01;
    Eigen::VectorXd w(2);
    w << 0.6, 0.4;
    const double zeta = 20.0;
    const double lin = 0.6 * 0.05 + 0.4 * -0.02;
    const double da = 0.6 * (0.05 - 0.01) + 0.4 * (-0.02 - 0.00);
    const double db = 0.6 * (0.05 - 0.02) + 0.4 * (-0.02 + 0.01);
    CHECK(payoff_g(r, ma, mb, w, zeta) ==
          doctest::Approx(lin - 0.5 * zeta * da * db).epsilon(1e-14));
}

TEST_CASE("the penalty vanishes when returns equal the predictive mean") {
    Eigen::MatrixXd r(3, 2);
    r << 0.01, 0.02, -0.01, 0.03, 0.00, -0.02;
    Eigen::VectorXd w = softmax_weights(Eigen::VectorXd::Zero(3));
    CHECK(payoff_g(r, r, r, w, 50.0) == doctest::Approx(payoff_g(r, r, r, w, 0.0)).epsilon(1e-14));
}

TEST_CASE("payoff is symmetric in the two predictive-mean batches") {
    RngStream rng(3);
    Eigen::MatrixXd r = Eigen::MatrixXd::NullaryExpr(3, 4, [&] { return 0.05 * rng.normal(); });
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(3, 4, [&] { return 0.02 * rng.normal(); });
    Eigen::MatrixXd b = Eigen::MatrixXd::NullaryExpr(3, 4, [&] { return 0.02 * rng.normal(); });
    Eigen::VectorXd w = softmax_weights(Eigen::VectorXd::Random(3));
    CHECK(payoff_g(r, a, b, w, 20.0) == doctest::Approx(payoff_g(r, b, a, w, 20.0)).epsilon(1e-14));
}

TEST_CASE("payoff gradients match finite differences at random instances") {
    RngStream rng(4);
    const double h = 1e-6;
    for (int rep = 0; rep < 100; ++rep) {
        const int p = 3, horizon = 2;
        Eigen::MatrixXd r(p, horizon), ma(p, horizon), mb(p, horizon);
        for (int i = 0; i < p; ++i)
            for (int t = 0; t < horizon; ++t) {
                r(i, t) = 0.1 * rng.normal();
                ma(i, t) = 0.03 * rng.normal();
                mb(i, t) = 0.03 * rng.normal();
            }
        const double zeta = 20.0 * rng.uniform();
        Eigen::VectorXd xi(p);
        for (int i = 0; i < p; ++i) xi(i) = rng.normal();

        // gradient in the weights
        Eigen::VectorXd w = softmax_weights(xi);
        Eigen::VectorXd gw = grad_payoff_wrt_weights(r, ma, mb, w, zeta);
        for (int i = 0; i < p; ++i) {
            Eigen::VectorXd hi = w, lo = w;
            hi(i) += h;
            lo(i) -= h;
            double fd = (payoff_g(r, ma, mb, hi, zeta) - payoff_g(r, ma, mb, lo, zeta)) / (2 * h);
            CHECK(rel_err(gw(i), fd) < 1e-6);
        }
        // chain rule through the softmax
        Eigen::VectorXd gx = grad_payoff_wrt_logits(r, ma, mb, xi, zeta);
        for (int i = 0; i < p; ++i) {
            Eigen::VectorXd hi = xi, lo = xi;
            hi(i) += h;
            lo(i) -= h;
            double fd = (payoff_g(r, ma, mb, softmax_weights(hi), zeta) -
                         payoff_g(r, ma, mb, softmax_weights(lo), zeta)) /
                        (2 * h);
            CHECK(rel_err(gx(i), fd) < 1e-6);
        }
    }
}

TEST_CASE("backtest: one gain and one equal loss leave 0.99 wealth and 10% drawdown") {
    auto m = backtest_metrics({0.10, -0.10});
    CHECK(m.final_wealth == doctest::Approx(0.99).epsilon(1e-15));
    CHECK(m.mdd == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(m.pct_gain == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(m.pct_loss == doctest::Approx(-10.0).epsilon(1e-12));
    CHECK(m.pct_wt == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(m.sharpe_defined);
}

TEST_CASE("backtest: identically zero returns give unit wealth and an undefined Sharpe") {
    auto m = backtest_metrics({0.0, 0.0, 0.0});
    CHECK(m.final_wealth == 1.0);
    CHECK(m.mdd == 0.0);
    CHECK(m.pct_wt == 0.0);
    CHECK(m.pct_gain == 0.0);
    CHECK(m.pct_loss == 0.0);
    CHECK(m.ann_ret == 0.0);
    CHECK(m.ann_vol == 0.0);
    CHECK_FALSE(m.sharpe_defined);
    CHECK(std::isnan(m.sharpe));
}

TEST_CASE("backtest needs at least two periods") {
    CHECK_THROWS_AS((void)backtest_metrics({0.1}), std::invalid_argument);
}

TEST_CASE("backtest metrics agree with an independent recomputation") {
    RngStream rng(5);
    std::vector<double> r;
    for (int i = 0; i < 60; ++i) r.push_back(0.02 * rng.normal());
    auto m = backtest_metrics(r);

    // independent pass, written differently on purpose
    double wealth = 1.0, peak = 1.0, worst = 0.0;
    std::vector<double> gains, losses;
    double sum = 0.0;
    for (double x : r) {
        wealth *= 1.0 + x;
        if (wealth > peak) peak = wealth;
        worst = std::max(worst, 1.0 - wealth / peak);
        if (x > 0)
            gains.push_back(x);
        else if (x < 0)
            losses.push_back(x);
        sum += x;
    }
    double mean = sum / double(r.size());
    double var = 0.0;
    for (double x : r) var += (x - mean) * (x - mean);
    var /= double(r.size()) - 1.0;
    auto avg = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / double(v.size());
    };

    CHECK(m.final_wealth == doctest::Approx(wealth).epsilon(1e-14));
    CHECK(m.mdd == doctest::Approx(100.0 * worst).epsilon(1e-12));
    CHECK(m.pct_gain == doctest::Approx(100.0 * avg(gains)).epsilon(1e-12));
    CHECK(m.pct_loss == doctest::Approx(100.0 * avg(losses)).epsilon(1e-12));
    CHECK(m.pct_wt == doctest::Approx(100.0 * double(gains.size()) / double(r.size()))
                          .epsilon(1e-12));
    CHECK(m.ann_ret == doctest::Approx(100.0 * 252.0 * mean).epsilon(1e-12));
    CHECK(m.ann_vol == doctest::Approx(100.0 * std::sqrt(252.0 * var)).epsilon(1e-12));
    CHECK(m.sharpe == doctest::Approx(m.ann_ret / m.ann_vol).epsilon(1e-12));
}
