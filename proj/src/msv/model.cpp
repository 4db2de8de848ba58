#include "ucso/msv/model.hpp"

#include <cmath>

namespace ucso::msv {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

double log_ar_density(double cur, double prev, const ArTriple& t) {
    if (t.sigma == 0.0) return 0.0;
    const double r = cur - t.mean - t.phi * (prev - t.mean);
    return -0.5 * kLog2Pi - std::log(t.sigma) - 0.5 * r * r / (t.sigma * t.sigma);
}

double log_factor_density(const Eigen::VectorXd& f, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& psi) {
    const int k = int(x.size());
    const Eigen::MatrixXd p = eigenvector_matrix(psi, k);
    const Eigen::VectorXd w = p.transpose() * f;  // coordinates in the eigenbasis
    double lp = -0.5 * k * kLog2Pi - 0.5 * x.sum();
    for (int i = 0; i < k; ++i) lp -= 0.5 * w(i) * w(i) * std::exp(-x(i));
    return lp;
}

double log_obs_density(const Eigen::VectorXd& y, const MsvChi& chi, const Eigen::VectorXd& f) {
    const Eigen::VectorXd mean = chi.B * f;
    double lp = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double r = y(i) - mean(i);
        lp += -0.5 * kLog2Pi - 0.5 * std::log(chi.V(i)) - 0.5 * r * r / chi.V(i);
    }
    return lp;
}

MsvLatent simulate_latents(const MsvTheta& theta, Eigen::Index horizon, RngStream& rng) {
    theta.validate();
    const int k = theta.factors();
    const int nr = n_rotation(k);
    MsvLatent u;
    u.X.resize(k, horizon);
    u.Psi.resize(nr, horizon);
    u.F.resize(k, horizon);
    for (Eigen::Index t = 0; t < horizon; ++t) {
        for (int i = 0; i < k; ++i) {
            const double prev = t == 0 ? theta.x[std::size_t(i)].mean : u.X(i, t - 1);
            u.X(i, t) = ar_step(prev, theta.x[std::size_t(i)], rng);
        }
        for (int i = 0; i < nr; ++i) {
            const double prev = t == 0 ? theta.psi[std::size_t(i)].mean : u.Psi(i, t - 1);
            u.Psi(i, t) = ar_step(prev, theta.psi[std::size_t(i)], rng);
        }
        const Eigen::MatrixXd p = eigenvector_matrix(u.Psi.col(t), k);
        Eigen::VectorXd z(k);
        for (int i = 0; i < k; ++i) z(i) = std::exp(0.5 * u.X(i, t)) * rng.normal();
        u.F.col(t) = p * z;
    }
    return u;
}

Eigen::MatrixXd simulate_returns(const MsvChi& chi, const Eigen::MatrixXd& factors,
                                 RngStream& rng) {
    chi.validate();
    const Eigen::Index horizon = factors.cols();
    Eigen::MatrixXd r(chi.assets(), horizon);
    const Eigen::VectorXd sd = chi.V.cwiseSqrt();
    for (Eigen::Index t = 0; t < horizon; ++t) {
        const Eigen::VectorXd mean = chi.B * factors.col(t);
        for (Eigen::Index i = 0; i < r.rows(); ++i)
            r(i, t) = std::expm1(mean(i) + sd(i) * rng.normal());
    }
    return r;
}

double log_latent_density(const MsvLatent& u, const MsvTheta& theta) {
    const int k = theta.factors();
    const int nr = n_rotation(k);
    double lp = 0.0;
    for (Eigen::Index t = 0; t < u.horizon(); ++t) {
        for (int i = 0; i < k; ++i) {
            const double prev = t == 0 ? theta.x[std::size_t(i)].mean : u.X(i, t - 1);
            lp += log_ar_density(u.X(i, t), prev, theta.x[std::size_t(i)]);
        }
        for (int i = 0; i < nr; ++i) {
            const double prev = t == 0 ? theta.psi[std::size_t(i)].mean : u.Psi(i, t - 1);
            lp += log_ar_density(u.Psi(i, t), prev, theta.psi[std::size_t(i)]);
        }
        lp += log_factor_density(u.F.col(t), u.X.col(t), u.Psi.col(t));
    }
    return lp;
}

ForwardSample forward_simulate(const MsvTheta& theta, const MsvChi& chi,
                               const Eigen::VectorXd& x_last, const Eigen::VectorXd& psi_last,
                               Eigen::Index horizon, RngStream& rng) {
    const int k = theta.factors();
    const int nr = n_rotation(k);
    ForwardSample out;
    out.u.X.resize(k, horizon);
    out.u.Psi.resize(nr, horizon);
    out.u.F.resize(k, horizon);
    out.r.resize(chi.assets(), horizon);
    const Eigen::VectorXd sd = chi.V.cwiseSqrt();
    for (Eigen::Index t = 0; t < horizon; ++t) {
        for (int i = 0; i < k; ++i) {
            const double prev = t == 0 ? x_last(i) : out.u.X(i, t - 1);
            out.u.X(i, t) = ar_step(prev, theta.x[std::size_t(i)], rng);
        }
        for (int i = 0; i < nr; ++i) {
            const double prev = t == 0 ? psi_last(i) : out.u.Psi(i, t - 1);
            out.u.Psi(i, t) = ar_step(prev, theta.psi[std::size_t(i)], rng);
        }
        const Eigen::MatrixXd p = eigenvector_matrix(out.u.Psi.col(t), k);
        Eigen::VectorXd z(k);
        for (int i = 0; i < k; ++i) z(i) = std::exp(0.5 * out.u.X(i, t)) * rng.normal();
        out.u.F.col(t) = p * z;
        const Eigen::VectorXd mean = chi.B * out.u.F.col(t);
        for (Eigen::Index i = 0; i < out.r.rows(); ++i)
            out.r(i, t) = std::expm1(mean(i) + sd(i) * rng.normal());
    }
    return out;
}

Eigen::MatrixXd predictive_mean(const MsvTheta& theta, const MsvChi& chi,
                                const Eigen::VectorXd& x_last, const Eigen::VectorXd& psi_last,
                                Eigen::Index horizon, int batch, RngStream& rng) {
    if (batch < 1) throw std::invalid_argument("predictive_mean: batch must be >= 1");
    const int k = theta.factors();
    const int nr = n_rotation(k);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(chi.assets(), horizon);
    Eigen::VectorXd x(k), psi(nr);
    for (int b = 0; b < batch; ++b) {
        x = x_last;
        psi = psi_last;
        for (Eigen::Index t = 0; t < horizon; ++t) {
            for (int i = 0; i < k; ++i) x(i) = ar_step(x(i), theta.x[std::size_t(i)], rng);
            for (int i = 0; i < nr; ++i) psi(i) = ar_step(psi(i), theta.psi[std::size_t(i)], rng);
            const Eigen::MatrixXd sigma = covariance(x, psi);
            const Eigen::VectorXd diag =
                (chi.B * sigma * chi.B.transpose()).diagonal() + chi.V;
            for (Eigen::Index i = 0; i < acc.rows(); ++i)
                acc(i, t) += std::expm1(0.5 * diag(i));
        }
    }
    return acc / double(batch);
}

}  // namespace ucso::msv
