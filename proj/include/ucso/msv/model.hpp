#pragma once

#include "ucso/msv/params.hpp"
#include "ucso/msv/rotation.hpp"

namespace ucso::msv {

// One AR(1) move; sigma == 0 components move deterministically to their mean
// recursion without consuming randomness.
inline double ar_step(double prev, const ArTriple& t, RngStream& rng) {
    double next = t.mean + t.phi * (prev - t.mean);
    if (t.sigma > 0.0) next += t.sigma * rng.normal();
    return next;
}

// log N(cur; mean + phi (prev - mean), sigma^2); pinned components contribute
// a constant.
double log_ar_density(double cur, double prev, const ArTriple& t);

// log N_K(f; 0, Sigma(x, psi)) using the spectral form.
double log_factor_density(const Eigen::VectorXd& f, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& psi);

// log N_p(y; B f, diag V) for y = log(1 + r).
double log_obs_density(const Eigen::VectorXd& y, const MsvChi& chi, const Eigen::VectorXd& f);

// Latent paths over `horizon` steps started from the AR means (X_0, Psi_0 in
// theta~), F_t | Sigma_t ~ N(0, Sigma_t).
MsvLatent simulate_latents(const MsvTheta& theta, Eigen::Index horizon, RngStream& rng);

// R_t = exp(N_p(B F_t, diag V)) - 1 columnwise.
Eigen::MatrixXd simulate_returns(const MsvChi& chi, const Eigen::MatrixXd& factors,
                                 RngStream& rng);

// log p(u_{1:T} | theta~): factor terms plus AR transitions (X_0, Psi_0 at the
// means).
double log_latent_density(const MsvLatent& u, const MsvTheta& theta);

struct ForwardSample {
    MsvLatent u;          // future latents
    Eigen::MatrixXd r;    // p x horizon future returns
};

// Forward simulation of (U, R) over the prediction horizon from the last
// history state.
ForwardSample forward_simulate(const MsvTheta& theta, const MsvChi& chi,
                               const Eigen::VectorXd& x_last, const Eigen::VectorXd& psi_last,
                               Eigen::Index horizon, RngStream& rng);

// Monte Carlo predictive means E[R_t | u_T, chi, theta~] for t = T+1..T+horizon,
// averaging the conditional closed form exp(0.5 diag(B Sigma_t B^T + V)) - 1
// over `batch` forward latent paths.
Eigen::MatrixXd predictive_mean(const MsvTheta& theta, const MsvChi& chi,
                                const Eigen::VectorXd& x_last, const Eigen::VectorXd& psi_last,
                                Eigen::Index horizon, int batch, RngStream& rng);

}  // namespace ucso::msv
