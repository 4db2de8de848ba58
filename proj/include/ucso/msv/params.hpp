#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "ucso/rng.hpp"

namespace ucso::msv {

// One latent AR(1) component: x_t = mean + phi (x_{t-1} - mean) + sigma eps_t,
// started at x_0 = mean.  sigma == 0 pins the path to its mean.
struct ArTriple {
    double phi = 0.0;
    double mean = 0.0;
    double sigma = 0.1;

    void validate() const {
        if (!(std::abs(phi) < 1.0)) throw std::domain_error("msv: |phi| must be < 1");
        if (sigma < 0.0) throw std::domain_error("msv: sigma must be >= 0");
    }
};

inline int n_rotation(int k) { return k * (k - 1) / 2; }

// theta~ = (theta_x, theta_psi): dynamics of log-eigenvalues and rotation angles.
struct MsvTheta {
    std::vector<ArTriple> x;    // K
    std::vector<ArTriple> psi;  // K(K-1)/2

    int factors() const { return int(x.size()); }
    void validate() const {
        if (x.empty()) throw std::domain_error("msv: need at least one factor");
        if (int(psi.size()) != n_rotation(factors()))
            throw std::domain_error("msv: psi triples must number K(K-1)/2");
        for (const auto& t : x) t.validate();
        for (const auto& t : psi) t.validate();
    }
};

// chi = (B, V): loading matrix and idiosyncratic variances.
struct MsvChi {
    Eigen::MatrixXd B;  // p x K
    Eigen::VectorXd V;  // p, positive

    int assets() const { return int(B.rows()); }
    int factors() const { return int(B.cols()); }
    void validate() const {
        if (B.rows() < 1 || B.cols() < 1) throw std::domain_error("msv: B must be nonempty");
        if (V.size() != B.rows()) throw std::domain_error("msv: V length must match assets");
        for (Eigen::Index i = 0; i < V.size(); ++i)
            if (!(V(i) > 0.0)) throw std::domain_error("msv: V entries must be positive");
    }
};

struct MsvParams {
    MsvTheta theta;
    MsvChi chi;

    void validate() const {
        theta.validate();
        chi.validate();
        if (chi.factors() != theta.factors())
            throw std::domain_error("msv: B columns must match factor count");
    }
};

// Latent block per time step: columns are time, rows are components.
struct MsvLatent {
    Eigen::MatrixXd F;    // K x T
    Eigen::MatrixXd X;    // K x T
    Eigen::MatrixXd Psi;  // K(K-1)/2 x T

    Eigen::Index horizon() const { return F.cols(); }
};

// Simplified synthetic priors: independent normals on the unconstrained
// scales (stretched-logistic AR coefficients, log variances and log
// innovation scales), tempered so prior-typical draws keep exp() of latent
// paths numerically sane.
double phi_to_unconstrained(double phi);
double phi_from_unconstrained(double a);

double log_prior_theta(const MsvTheta& theta);
double log_prior_chi(const MsvChi& chi);

MsvTheta sample_theta_prior(int k, RngStream& rng);
MsvChi sample_chi_prior(int p, int k, RngStream& rng);

}  // namespace ucso::msv
