#include "ucso/ssm/cpf.hpp"

#include <cmath>
#include <vector>

namespace ucso::ssm {

LatentPath cpf_bs_kernel(const LatentPath& ref, const SsmData& data, ModelIndex m,
                         const SsmParams& params, const PgasConfig& cfg, RngStream& rng) {
    cfg.validate();
    params.validate();
    const Eigen::Index horizon = data.horizon();
    if (ref.size() != horizon) throw std::invalid_argument("cpf_bs_kernel: reference length mismatch");
    const int n = cfg.n_particles;
    const double sd = std::sqrt(params.Sigma);

    Eigen::MatrixXd particles(n, horizon);
    Eigen::MatrixXd log_w(n, horizon);

    // t = 0: propagate from the known x0, reference frozen in the last slot
    for (int i = 0; i < n - 1; ++i)
        particles(i, 0) = params.mu * data.x0 + sd * rng.normal();
    particles(n - 1, 0) = ref(0);
    for (int i = 0; i < n; ++i)
        log_w(i, 0) = log_obs_density(data.y(0), particles(i, 0), params.sigma, m);

    std::vector<double> col(static_cast<std::size_t>(n));
    for (Eigen::Index t = 1; t < horizon; ++t) {
        for (int i = 0; i < n; ++i) col[std::size_t(i)] = log_w(i, t - 1);
        for (int i = 0; i < n - 1; ++i) {
            const std::size_t a = rng.categorical_log(col);
            particles(i, t) = params.mu * particles(Eigen::Index(a), t - 1) + sd * rng.normal();
        }
        particles(n - 1, t) = ref(t);
        for (int i = 0; i < n; ++i)
            log_w(i, t) = log_obs_density(data.y(t), particles(i, t), params.sigma, m);
    }

    // backward sampling with transition-reweighted ancestors
    LatentPath out(horizon);
    for (int i = 0; i < n; ++i) col[std::size_t(i)] = log_w(i, horizon - 1);
    Eigen::Index b = Eigen::Index(rng.categorical_log(col));
    out(horizon - 1) = particles(b, horizon - 1);
    for (Eigen::Index t = horizon - 2; t >= 0; --t) {
        for (int i = 0; i < n; ++i)
            col[std::size_t(i)] = log_w(i, t) +
                                  log_transition(out(t + 1), particles(i, t), params.mu, params.Sigma);
        b = Eigen::Index(rng.categorical_log(col));
        out(t) = particles(b, t);
    }
    return out;
}

}  // namespace ucso::ssm
