#pragma once

#include <Eigen/Dense>

namespace ucso::msv {

// Omega = (pi/2)(1 - e^Psi)/(1 + e^Psi) in (-pi/2, pi/2), inverse of
// Psi = log(pi/2 - Omega) - log(pi/2 + Omega).
double psi_to_omega(double psi);
double omega_to_psi(double omega);

// Identity with (i,i) = (j,j) = cos, (i,j) = sin, (j,i) = -sin.
Eigen::MatrixXd rotation_matrix(double omega, int i, int j, int k);

// Ordered product of the K(K-1)/2 Givens rotations, lexicographic in (i, j).
Eigen::MatrixXd eigenvector_matrix(const Eigen::VectorXd& psi, int k);

// Sigma_t = P Lambda P^T with eigenvalues exp(x_i).
Eigen::MatrixXd covariance(const Eigen::VectorXd& x, const Eigen::VectorXd& psi);

}  // namespace ucso::msv
