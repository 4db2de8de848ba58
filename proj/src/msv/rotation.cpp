#include "ucso/msv/rotation.hpp"

#include <cmath>
#include <stdexcept>

#include "ucso/msv/params.hpp"

namespace ucso::msv {

double psi_to_omega(double psi) {
    // (pi/2) tanh(-psi/2), written through expm1 for large |psi|
    const double e = std::exp(psi);
    return 0.5 * M_PI * (1.0 - e) / (1.0 + e);
}

double omega_to_psi(double omega) {
    if (!(omega > -0.5 * M_PI && omega < 0.5 * M_PI))
        throw std::domain_error("omega must lie in (-pi/2, pi/2)");
    return std::log(0.5 * M_PI - omega) - std::log(0.5 * M_PI + omega);
}

Eigen::MatrixXd rotation_matrix(double omega, int i, int j, int k) {
    if (i < 0 || j <= i || j >= k) throw std::invalid_argument("rotation_matrix: need 0 <= i < j < k");
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(k, k);
    const double c = std::cos(omega), s = std::sin(omega);
    g(i, i) = c;
    g(j, j) = c;
    g(i, j) = s;
    g(j, i) = -s;
    return g;
}

Eigen::MatrixXd eigenvector_matrix(const Eigen::VectorXd& psi, int k) {
    if (psi.size() != n_rotation(k))
        throw std::invalid_argument("eigenvector_matrix: psi length must be K(K-1)/2");
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(k, k);
    Eigen::Index idx = 0;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            p = p * rotation_matrix(psi_to_omega(psi(idx++)), i, j, k);
    return p;
}

Eigen::MatrixXd covariance(const Eigen::VectorXd& x, const Eigen::VectorXd& psi) {
    const int k = int(x.size());
    Eigen::MatrixXd p = eigenvector_matrix(psi, k);
    Eigen::MatrixXd sigma = p * x.array().exp().matrix().asDiagonal() * p.transpose();
    return 0.5 * (sigma + sigma.transpose());  // enforce exact symmetry
}

}  // namespace ucso::msv
