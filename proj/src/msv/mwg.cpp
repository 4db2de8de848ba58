#include "ucso/msv/mwg.hpp"

#include <cmath>

namespace ucso::msv {

namespace {

double log_std_normal(double v) { return -0.5 * 1.8378770664093454836 - 0.5 * v * v; }

struct SweepContext {
    MwgState& st;
    const Eigen::MatrixXd& y;
    const MwgConfig& cfg;
    RngStream& rng;
    MwgStats* stats;

    double obs_term(Eigen::Index t, const Eigen::VectorXd& f) const {
        return cfg.use_likelihood ? log_obs_density(y.col(t), st.chi, f) : 0.0;
    }

    // AR transition terms touching X(i, t): (t-1 -> t) and (t -> t+1)
    double x_local(int i, Eigen::Index t, double value) const {
        const auto& triple = st.theta.x[std::size_t(i)];
        const double prev = t == 0 ? triple.mean : st.u.X(i, t - 1);
        double lp = log_ar_density(value, prev, triple);
        if (t + 1 < st.u.horizon()) lp += log_ar_density(st.u.X(i, t + 1), value, triple);
        return lp;
    }
    double psi_local(int i, Eigen::Index t, double value) const {
        const auto& triple = st.theta.psi[std::size_t(i)];
        const double prev = t == 0 ? triple.mean : st.u.Psi(i, t - 1);
        double lp = log_ar_density(value, prev, triple);
        if (t + 1 < st.u.horizon()) lp += log_ar_density(st.u.Psi(i, t + 1), value, triple);
        return lp;
    }

    bool accept(double delta) {
        if (stats) ++stats->proposed;
        if (!std::isfinite(delta)) return false;
        if (delta >= 0.0 || std::log(rng.uniform()) < delta) {
            if (stats) ++stats->accepted;
            return true;
        }
        return false;
    }
};

}  // namespace

void mwg_sweep(MwgState& state, const Eigen::MatrixXd& y, const MwgConfig& cfg, RngStream& rng,
               MwgStats* stats) {
    state.theta.validate();
    state.chi.validate();
    const Eigen::Index horizon = state.u.horizon();
    if (cfg.use_likelihood && y.cols() != horizon)
        throw std::invalid_argument("mwg_sweep: data horizon mismatch");
    const int k = state.theta.factors();
    const int nr = n_rotation(k);
    SweepContext ctx{state, y, cfg, rng, stats};

    for (Eigen::Index t = 0; t < horizon; ++t) {
        // F_t block
        {
            Eigen::VectorXd prop = state.u.F.col(t);
            for (int i = 0; i < k; ++i) prop(i) += cfg.scale_latent * rng.normal();
            const double cur = ctx.obs_term(t, state.u.F.col(t)) +
                               log_factor_density(state.u.F.col(t), state.u.X.col(t),
                                                  state.u.Psi.col(t));
            const double alt = ctx.obs_term(t, prop) +
                               log_factor_density(prop, state.u.X.col(t), state.u.Psi.col(t));
            if (ctx.accept(alt - cur)) state.u.F.col(t) = prop;
        }
        // X_t block, componentwise (pinned components skipped)
        for (int i = 0; i < k; ++i) {
            if (state.theta.x[std::size_t(i)].sigma == 0.0) continue;
            const double cur_v = state.u.X(i, t);
            const double prop_v = cur_v + cfg.scale_latent * rng.normal();
            Eigen::VectorXd x_prop = state.u.X.col(t);
            x_prop(i) = prop_v;
            const double cur = ctx.x_local(i, t, cur_v) +
                               log_factor_density(state.u.F.col(t), state.u.X.col(t),
                                                  state.u.Psi.col(t));
            const double alt = ctx.x_local(i, t, prop_v) +
                               log_factor_density(state.u.F.col(t), x_prop, state.u.Psi.col(t));
            if (ctx.accept(alt - cur)) state.u.X(i, t) = prop_v;
        }
        // Psi_t block, componentwise
        for (int i = 0; i < nr; ++i) {
            if (state.theta.psi[std::size_t(i)].sigma == 0.0) continue;
            const double cur_v = state.u.Psi(i, t);
            const double prop_v = cur_v + cfg.scale_latent * rng.normal();
            Eigen::VectorXd psi_prop = state.u.Psi.col(t);
            psi_prop(i) = prop_v;
            const double cur = ctx.psi_local(i, t, cur_v) +
                               log_factor_density(state.u.F.col(t), state.u.X.col(t),
                                                  state.u.Psi.col(t));
            const double alt = ctx.psi_local(i, t, prop_v) +
                               log_factor_density(state.u.F.col(t), state.u.X.col(t), psi_prop);
            if (ctx.accept(alt - cur)) state.u.Psi(i, t) = prop_v;
        }
    }

    if (cfg.update_chi) {
        // row-of-B blocks; row i only touches observation component i
        auto obs_row = [&](Eigen::Index i, const Eigen::RowVectorXd& b_row, double v_i) {
            if (!cfg.use_likelihood) return 0.0;
            double lp = 0.0;
            for (Eigen::Index t = 0; t < horizon; ++t) {
                const double r = y(i, t) - b_row.dot(state.u.F.col(t));
                lp += -0.5 * std::log(v_i) - 0.5 * r * r / v_i;
            }
            return lp;
        };
        for (Eigen::Index i = 0; i < state.chi.B.rows(); ++i) {
            Eigen::RowVectorXd prop = state.chi.B.row(i);
            for (Eigen::Index j = 0; j < prop.size(); ++j) prop(j) += cfg.scale_chi * rng.normal();
            double cur = obs_row(i, state.chi.B.row(i), state.chi.V(i));
            double alt = obs_row(i, prop, state.chi.V(i));
            for (Eigen::Index j = 0; j < prop.size(); ++j) {
                cur += log_std_normal(state.chi.B(i, j));
                alt += log_std_normal(prop(j));
            }
            if (ctx.accept(alt - cur)) state.chi.B.row(i) = prop;
        }
        for (Eigen::Index i = 0; i < state.chi.V.size(); ++i) {
            const double cur_log = std::log(state.chi.V(i));
            const double prop_log = cur_log + cfg.scale_chi * rng.normal();
            const double cur = obs_row(i, state.chi.B.row(i), state.chi.V(i)) +
                               log_std_normal(cur_log);
            const double alt = obs_row(i, state.chi.B.row(i), std::exp(prop_log)) +
                               log_std_normal(prop_log);
            if (ctx.accept(alt - cur)) state.chi.V(i) = std::exp(prop_log);
        }
    }

    if (cfg.update_theta) {
        // AR-triple blocks on unconstrained (atanh-like, identity, log) scales
        auto chain_term = [&](const ArTriple& triple, auto value, auto prev_value) {
            double lp = 0.0;
            for (Eigen::Index t = 0; t < horizon; ++t) {
                const double prev = t == 0 ? triple.mean : prev_value(t - 1);
                lp += log_ar_density(value(t), prev, triple);
            }
            return lp;
        };
        auto triple_prior = [&](const ArTriple& triple) {
            return log_std_normal(phi_to_unconstrained(triple.phi)) + log_std_normal(triple.mean) +
                   log_std_normal(std::log(triple.sigma));
        };
        auto update_triple = [&](ArTriple& triple, auto value) {
            if (triple.sigma == 0.0) return;  // pinned configuration
            ArTriple prop = triple;
            prop.phi = phi_from_unconstrained(phi_to_unconstrained(triple.phi) +
                                              cfg.scale_theta * rng.normal());
            prop.mean = triple.mean + cfg.scale_theta * rng.normal();
            prop.sigma = std::exp(std::log(triple.sigma) + cfg.scale_theta * rng.normal());
            auto row = [&](Eigen::Index t) { return value(t); };
            const double cur = chain_term(triple, row, row) + triple_prior(triple);
            const double alt = chain_term(prop, row, row) + triple_prior(prop);
            if (ctx.accept(alt - cur)) triple = prop;
        };
        for (int i = 0; i < k; ++i)
            update_triple(state.theta.x[std::size_t(i)],
                          [&, i](Eigen::Index t) { return state.u.X(i, t); });
        for (int i = 0; i < nr; ++i)
            update_triple(state.theta.psi[std::size_t(i)],
                          [&, i](Eigen::Index t) { return state.u.Psi(i, t); });
    }
}

}  // namespace ucso::msv
