#include "ucso/ssm/kalman.hpp"

#include <cmath>

namespace ucso::ssm {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

struct FilterStore {
    Eigen::VectorXd mean, var;            // filtered
    Eigen::VectorXd pred_mean, pred_var;  // one-step predictions
};

FilterStore run_filter(const SsmData& data, const SsmParams& p) {
    const Eigen::Index horizon = data.horizon();
    FilterStore fs;
    fs.mean.resize(horizon);
    fs.var.resize(horizon);
    fs.pred_mean.resize(horizon);
    fs.pred_var.resize(horizon);
    double m = data.x0, v = 0.0;
    const double r = p.sigma * p.sigma;
    for (Eigen::Index n = 0; n < horizon; ++n) {
        const double mp = p.mu * m;
        const double vp = p.mu * p.mu * v + p.Sigma;
        const double s = vp + r;
        const double k = vp / s;
        fs.pred_mean(n) = mp;
        fs.pred_var(n) = vp;
        m = mp + k * (data.y(n) - mp);
        v = (1.0 - k) * vp;
        fs.mean(n) = m;
        fs.var(n) = v;
    }
    return fs;
}
}  // namespace

double kalman_loglik(const SsmData& data, const SsmParams& p) {
    p.validate();
    double ll = 0.0;
    double m = data.x0, v = 0.0;
    const double r = p.sigma * p.sigma;
    for (Eigen::Index n = 0; n < data.horizon(); ++n) {
        const double mp = p.mu * m;
        const double vp = p.mu * p.mu * v + p.Sigma;
        const double s = vp + r;
        const double e = data.y(n) - mp;
        ll += -0.5 * (kLog2Pi + std::log(s)) - 0.5 * e * e / s;
        const double k = vp / s;
        m = mp + k * e;
        v = (1.0 - k) * vp;
    }
    return ll;
}

Eigen::Vector3d kalman_score(const SsmData& data, const SsmParams& p) {
    p.validate();
    const double r = p.sigma * p.sigma;
    double m = data.x0, v = 0.0;
    // sensitivities of (m, v) w.r.t. (sigma, mu, Sigma)
    Eigen::Vector3d dm = Eigen::Vector3d::Zero();
    Eigen::Vector3d dv = Eigen::Vector3d::Zero();
    Eigen::Vector3d score = Eigen::Vector3d::Zero();
    for (Eigen::Index n = 0; n < data.horizon(); ++n) {
        const double mp = p.mu * m;
        const double vp = p.mu * p.mu * v + p.Sigma;
        Eigen::Vector3d dmp = p.mu * dm;
        dmp(1) += m;
        Eigen::Vector3d dvp = p.mu * p.mu * dv;
        dvp(1) += 2.0 * p.mu * v;
        dvp(2) += 1.0;

        const double s = vp + r;
        Eigen::Vector3d ds = dvp;
        ds(0) += 2.0 * p.sigma;
        const double e = data.y(n) - mp;
        const Eigen::Vector3d de = -dmp;

        score += -0.5 * ds / s + 0.5 * e * e * ds / (s * s) - e * de / s;

        const double k = vp / s;
        const Eigen::Vector3d dk = dvp / s - vp * ds / (s * s);
        dm = dmp + dk * e + k * de;
        dv = dvp - dk * vp - k * dvp;
        m = mp + k * e;
        v = (1.0 - k) * vp;
    }
    return score;
}

SmootherResult kalman_smoother(const SsmData& data, const SsmParams& p) {
    p.validate();
    const Eigen::Index horizon = data.horizon();
    FilterStore fs = run_filter(data, p);
    SmootherResult sr;
    sr.mean.resize(horizon);
    sr.variance.resize(horizon);
    sr.mean(horizon - 1) = fs.mean(horizon - 1);
    sr.variance(horizon - 1) = fs.var(horizon - 1);
    for (Eigen::Index n = horizon - 2; n >= 0; --n) {
        const double c = fs.var(n) * p.mu / fs.pred_var(n + 1);
        sr.mean(n) = fs.mean(n) + c * (sr.mean(n + 1) - fs.pred_mean(n + 1));
        sr.variance(n) = fs.var(n) + c * c * (sr.variance(n + 1) - fs.pred_var(n + 1));
    }
    return sr;
}

}  // namespace ucso::ssm
