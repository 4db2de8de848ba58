#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ucso/ssm/cpf.hpp"
#include "ucso/ssm/kalman.hpp"

using namespace ucso;
using ssm::ModelIndex;
using ssm::SsmParams;

namespace {

// Batch-means standard error for a correlated chain.
double batch_se(const std::vector<double>& chain, int n_batches) {
    const int len = int(chain.size()) / n_batches;
    std::vector<double> means;
    for (int b = 0; b < n_batches; ++b) {
        double s = 0.0;
        for (int i = 0; i < len; ++i) s += chain[std::size_t(b * len + i)];
        means.push_back(s / len);
    }
    double m = 0.0;
    for (double v : means) m += v / n_batches;
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m) / (n_batches - 1);
    return std::sqrt(var / n_batches);
}

}  // namespace

TEST_CASE("argument validation") {
    SsmParams p{0.3, 0.9, 0.2};
    ssm::SsmData data;
    data.y = Eigen::VectorXd::Zero(3);
    ssm::PgasConfig cfg;
    cfg.n_particles = 1;
    ssm::LatentPath ref = Eigen::VectorXd::Zero(3);
    RngStream rng(1);
    CHECK_THROWS_AS((void)ssm::cpf_bs_kernel(ref, data, ModelIndex::gaussian_tag(), p, cfg, rng),
                    std::invalid_argument);
    cfg.n_particles = 4;
    ssm::LatentPath short_ref = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(
        (void)ssm::cpf_bs_kernel(short_ref, data, ModelIndex::gaussian_tag(), p, cfg, rng),
        std::invalid_argument);
}

TEST_CASE("the kernel is a pure function of its stream") {
    SsmParams p{0.3, 0.95, 0.2};
    RngStream drng(2);
    auto data = ssm::simulate(p, ModelIndex::gaussian_tag(), 8, drng);
    ssm::PgasConfig cfg;
    cfg.n_particles = 6;
    ssm::LatentPath ref = Eigen::VectorXd::Zero(8);
    RngStream a(5), b(5);
    auto xa = ssm::cpf_bs_kernel(ref, data, ModelIndex::gaussian_tag(), p, cfg, a);
    auto xb = ssm::cpf_bs_kernel(ref, data, ModelIndex::gaussian_tag(), p, cfg, b);
    CHECK(xa == xb);
}

TEST_CASE("two-particle single-step selection matches the closed form") {
    // With N = 2 and T = 1 the free particle is x ~ N(mu x0, Sigma) and the
    // output equals the reference with probability w_ref / (w(x) + w_ref),
    // observation-weighted; the marginal acceptance has a quadrature value.
    SsmParams p{0.4, 0.7, 0.3};
    ssm::SsmData data;
    data.x0 = 0.5;
    data.y = Eigen::VectorXd::Constant(1, 0.8);
    const double ref_val = -0.2;
    const auto m = ModelIndex::gaussian_tag();

    const double mean = p.mu * data.x0;
    const double sd = std::sqrt(p.Sigma);
    const double w_ref = std::exp(ssm::log_obs_density(data.y(0), ref_val, p.sigma, m));

    // Simpson quadrature over +-8 standard deviations
    const int n_grid = 4000;
    const double lo = mean - 8 * sd, hi = mean + 8 * sd;
    const double h = (hi - lo) / n_grid;
    double integral = 0.0;
    for (int i = 0; i <= n_grid; ++i) {
        const double x = lo + i * h;
        const double phi = std::exp(-0.5 * std::pow((x - mean) / sd, 2)) /
                           (sd * std::sqrt(2 * M_PI));
        const double w = std::exp(ssm::log_obs_density(data.y(0), x, p.sigma, m));
        const double f = phi * w_ref / (w + w_ref);
        const double coeff = (i == 0 || i == n_grid) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        integral += coeff * f;
    }
    const double p_ref = integral * h / 3.0;

    ssm::PgasConfig cfg;
    cfg.n_particles = 2;
    ssm::LatentPath ref = Eigen::VectorXd::Constant(1, ref_val);
    RngStream rng(31);
    const int n = 100000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        RngStream sub = rng.child(std::uint64_t(i));
        auto out = ssm::cpf_bs_kernel(ref, data, m, p, cfg, sub);
        if (out(0) == ref_val) ++hits;
    }
    const double freq = double(hits) / n;
    const double se = std::sqrt(p_ref * (1 - p_ref) / n);
    CHECK(std::abs(freq - p_ref) < 3.0 * se);
}

TEST_CASE("long chains reproduce the Kalman smoothing distribution") {
    SsmParams p{0.3, 0.95, 0.2};
    RngStream drng(7);
    auto data = ssm::simulate(p, ModelIndex::gaussian_tag(), 10, drng);
    auto truth = ssm::kalman_smoother(data, p);

    ssm::PgasConfig cfg;
    cfg.n_particles = 10;
    RngStream rng(91);
    ssm::LatentPath x = ssm::sample_prior_path(p, data.x0, data.horizon(), rng);
    const int burn = 1000, keep = 20000;
    for (int i = 0; i < burn; ++i) x = ssm::cpf_bs_kernel(x, data, ModelIndex::gaussian_tag(), p, cfg, rng);

    std::vector<std::vector<double>> chains(10);
    std::vector<double> mean(10, 0.0), m2(10, 0.0);
    for (int i = 0; i < keep; ++i) {
        x = ssm::cpf_bs_kernel(x, data, ModelIndex::gaussian_tag(), p, cfg, rng);
        for (int t = 0; t < 10; ++t) {
            chains[std::size_t(t)].push_back(x(t));
            mean[std::size_t(t)] += x(t) / keep;
            m2[std::size_t(t)] += x(t) * x(t) / keep;
        }
    }
    for (int t = 0; t < 10; ++t) {
        double se = batch_se(chains[std::size_t(t)], 40);
        CHECK(std::abs(mean[std::size_t(t)] - truth.mean(t)) < 4.0 * se);
        // variances agree loosely as well
        double var = m2[std::size_t(t)] - mean[std::size_t(t)] * mean[std::size_t(t)];
        CHECK(var == doctest::Approx(truth.variance(t)).epsilon(0.25));
    }
}

TEST_CASE("an uninformative likelihood leaves the prior invariant") {
    SsmParams p{100.0, 0.8, 0.25};  // sigma huge: observations carry no information
    ssm::SsmData data;
    data.x0 = 0.4;
    data.y = Eigen::VectorXd::Zero(3);
    ssm::PgasConfig cfg;
    cfg.n_particles = 10;
    RngStream rng(17);
    ssm::LatentPath x = ssm::sample_prior_path(p, data.x0, 3, rng);
    const int keep = 30000;
    std::vector<double> x0_chain;
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < keep; ++i) {
        x = ssm::cpf_bs_kernel(x, data, ModelIndex::gaussian_tag(), p, cfg, rng);
        x0_chain.push_back(x(0));
        mean += x(0) / keep;
        m2 += x(0) * x(0) / keep;
    }
    // prior marginal of x_1 is N(mu x0, Sigma)
    double se = batch_se(x0_chain, 40);
    CHECK(std::abs(mean - p.mu * data.x0) < 4.0 * se);
    CHECK(m2 - mean * mean == doctest::Approx(p.Sigma).epsilon(0.1));
}

TEST_CASE("the reference path always survives in distribution support") {
    // Repeated application from a very unlikely reference still returns valid
    // finite paths (the frozen slot guarantees a nonzero weight).
    SsmParams p{0.2, 0.9, 0.1};
    RngStream drng(4);
    auto data = ssm::simulate(p, ModelIndex::student(5), 6, drng);
    ssm::PgasConfig cfg;
    cfg.n_particles = 3;
    RngStream rng(8);
    ssm::LatentPath x = Eigen::VectorXd::Constant(6, 25.0);
    for (int i = 0; i < 50; ++i) {
        x = ssm::cpf_bs_kernel(x, data, ModelIndex::student(5), p, cfg, rng);
        CHECK(x.allFinite());
    }
}
