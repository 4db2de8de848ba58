#pragma once

#include <Eigen/Dense>

#include "ucso/ssm/model.hpp"

namespace ucso::ssm {

// Linear-Gaussian reference: x_n = mu x_{n-1} + N(0, Sigma), y_n = x_n + N(0, sigma^2),
// x_0 known exactly.

double kalman_loglik(const SsmData& data, const SsmParams& params);

// Exact score grad_{sigma,mu,Sigma} log p(y_{1:T}) via tangent-linear
// propagation of the predicted mean/variance for each parameter.
Eigen::Vector3d kalman_score(const SsmData& data, const SsmParams& params);

struct SmootherResult {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

// RTS smoother marginals for the Gaussian observation model.
SmootherResult kalman_smoother(const SsmData& data, const SsmParams& params);

}  // namespace ucso::ssm
