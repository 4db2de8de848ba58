#include "ucso/msv/params.hpp"

#include <cmath>

namespace ucso::msv {

double phi_to_unconstrained(double phi) {
    if (!(std::abs(phi) < 1.0)) throw std::domain_error("phi must lie in (-1, 1)");
    return std::log1p(phi) - std::log1p(-phi);
}

double phi_from_unconstrained(double a) {
    return 2.0 / (1.0 + std::exp(-a)) - 1.0;
}

namespace {

// Prior hyperparameters, shared between the samplers and the log densities.
// Scales are tempered so that exp() of prior-typical latent paths stays in
// numerically sane territory for synthetic return pipelines.
constexpr double kPhiSd = 1.0;       // unconstrained AR coefficient
constexpr double kXMeanCenter = -2.5, kXMeanSd = 0.5;  // log-eigenvalue level
constexpr double kPsiMeanCenter = 0.0, kPsiMeanSd = 0.5;  // rotation angles
constexpr double kLogSigmaCenter = -1.897, kLogSigmaSd = 0.25;  // vol-of-vol
constexpr double kBSd = 0.3;                            // factor loadings
constexpr double kLogVCenter = -2.5, kLogVSd = 0.5;     // idiosyncratic var

double log_normal_pdf(double v, double mu, double sd) {
    const double z = (v - mu) / sd;
    return -0.5 * 1.8378770664093454836 - std::log(sd) - 0.5 * z * z;
}

}  // namespace

double log_prior_theta(const MsvTheta& theta) {
    double lp = 0.0;
    auto add = [&](const ArTriple& t, double mean_center, double mean_sd) {
        lp += log_normal_pdf(phi_to_unconstrained(t.phi), 0.0, kPhiSd);
        lp += log_normal_pdf(t.mean, mean_center, mean_sd);
        lp += log_normal_pdf(std::log(t.sigma), kLogSigmaCenter, kLogSigmaSd);
    };
    for (const auto& t : theta.x) add(t, kXMeanCenter, kXMeanSd);
    for (const auto& t : theta.psi) add(t, kPsiMeanCenter, kPsiMeanSd);
    return lp;
}

double log_prior_chi(const MsvChi& chi) {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < chi.B.rows(); ++i)
        for (Eigen::Index j = 0; j < chi.B.cols(); ++j)
            lp += log_normal_pdf(chi.B(i, j), 0.0, kBSd);
    for (Eigen::Index i = 0; i < chi.V.size(); ++i)
        lp += log_normal_pdf(std::log(chi.V(i)), kLogVCenter, kLogVSd);
    return lp;
}

MsvTheta sample_theta_prior(int k, RngStream& rng) {
    MsvTheta theta;
    auto draw = [&](double mean_center, double mean_sd) {
        ArTriple t;
        t.phi = phi_from_unconstrained(kPhiSd * rng.normal());
        t.mean = mean_center + mean_sd * rng.normal();
        t.sigma = std::exp(kLogSigmaCenter + kLogSigmaSd * rng.normal());
        return t;
    };
    theta.x.reserve(std::size_t(k));
    for (int i = 0; i < k; ++i) theta.x.push_back(draw(kXMeanCenter, kXMeanSd));
    const int nr = n_rotation(k);
    theta.psi.reserve(std::size_t(nr));
    for (int i = 0; i < nr; ++i) theta.psi.push_back(draw(kPsiMeanCenter, kPsiMeanSd));
    return theta;
}

MsvChi sample_chi_prior(int p, int k, RngStream& rng) {
    MsvChi chi;
    chi.B.resize(p, k);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < k; ++j) chi.B(i, j) = kBSd * rng.normal();
    chi.V.resize(p);
    for (Eigen::Index i = 0; i < p; ++i)
        chi.V(i) = std::exp(kLogVCenter + kLogVSd * rng.normal());
    return chi;
}

}  // namespace ucso::msv
