#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "ucso/rng.hpp"

namespace ucso::ssm {

// xi = (sigma, mu, Sigma): observation scale, AR coefficient, latent noise
// variance of X_n = mu X_{n-1} + Sigma^{1/2} eps_n.
struct SsmParams {
    double sigma = 0.3;
    double mu = 0.95;
    double Sigma = 0.2;

    void validate() const;
    Eigen::Vector3d as_vector() const { return {sigma, mu, Sigma}; }
    static SsmParams from_vector(const Eigen::VectorXd& v) { return {v(0), v(1), v(2)}; }
};

// Observation model index: Student-t with `dof` degrees of freedom, or the
// Gaussian component when dof == 0.
struct ModelIndex {
    std::int64_t dof = 0;
    bool gaussian() const { return dof == 0; }
    static ModelIndex gaussian_tag() { return {0}; }
    static ModelIndex student(std::int64_t m) { return {m}; }
};

struct SsmData {
    Eigen::VectorXd y;       // observations, length T
    Eigen::VectorXd x_true;  // optional simulated latent path
    double x0 = 0.0;
    // generation metadata, carried through dataset files
    SsmParams params_true;
    std::int64_t m_true = 0;
    std::uint64_t seed = 0;

    Eigen::Index horizon() const { return y.size(); }
};

using LatentPath = Eigen::VectorXd;  // x_{1:T}

// Log observation density log g_sigma(y | x, m) and its partials.
double log_obs_density(double y, double x, double sigma, ModelIndex m);
// d/dsigma and d/dx of the log observation density.
void grad_obs(double y, double x, double sigma, ModelIndex m, double& d_sigma, double& d_x);

// Gaussian transition log density log N(x_n; mu x_prev, Sigma) and partials.
double log_transition(double x_n, double x_prev, double mu, double Sigma);
void grad_transition(double x_n, double x_prev, double mu, double Sigma, double& d_mu,
                     double& d_Sigma);

// sum_n grad log( g_sigma(y_n|x_n,m) t_theta(x_n|x_{n-1}) ) in (sigma, mu, Sigma).
Eigen::Vector3d score_integrand(const LatentPath& path, const SsmData& data, ModelIndex m,
                                const SsmParams& params);

SsmData simulate(const SsmParams& params, ModelIndex m, Eigen::Index horizon, RngStream& rng,
                 double x0 = 0.0);

// AR(1) prior path draw from x0, the eta(.|z) of the adapter.
LatentPath sample_prior_path(const SsmParams& params, double x0, Eigen::Index horizon,
                             RngStream& rng);

// Replayable dataset files: comment header with the generating configuration,
// one observation per line.
void save_dataset(const SsmData& data, const std::string& path);
SsmData load_dataset(const std::string& path);

}  // namespace ucso::ssm
