#include "ucso/msv/adapter.hpp"

namespace ucso::msv {

void MsvCsoF1::refresh_predictions(Outer& z, RngStream& rng) const {
    const Eigen::Index last = z.state.u.horizon() - 1;
    RngStream pa = rng.child("pred-a");
    z.pred_a = predictive_mean(z.state.theta, z.state.chi, z.state.u.X.col(last),
                               z.state.u.Psi.col(last), cfg.horizon, cfg.pred_batch, pa);
    if (cfg.independent_batches) {
        RngStream pb = rng.child("pred-b");
        z.pred_b = predictive_mean(z.state.theta, z.state.chi, z.state.u.X.col(last),
                                   z.state.u.Psi.col(last), cfg.horizon, cfg.pred_batch, pb);
    } else {
        z.pred_b = z.pred_a;
    }
}

MsvCsoF1::Outer MsvCsoF1::make_initial_outer(RngStream& rng) const {
    Outer z;
    RngStream rt = rng.child("theta0");
    z.state.theta = sample_theta_prior(n_factors, rt);
    RngStream rc = rng.child("chi0");
    z.state.chi = sample_chi_prior(assets(), n_factors, rc);
    RngStream ru = rng.child("u0");
    z.state.u = simulate_latents(z.state.theta, y.cols(), ru);
    RngStream rp = rng.child("pred0");
    refresh_predictions(z, rp);
    return z;
}

MsvCsoF1::Inner MsvCsoF1::sample_initial(const Outer& z, const Eigen::VectorXd&,
                                         RngStream& rng) const {
    const Eigen::Index last = z.state.u.horizon() - 1;
    ForwardSample fs = forward_simulate(z.state.theta, z.state.chi, z.state.u.X.col(last),
                                        z.state.u.Psi.col(last), cfg.horizon, rng);
    return Inner{std::move(fs.r), std::move(fs.u)};
}

MsvCsoF1::Outer MsvCsoF1::outer_step(const Outer& z, RngStream& rng) const {
    Outer next = z;
    MwgConfig mwg = cfg.mwg;
    mwg.update_theta = true;
    mwg.update_chi = true;
    RngStream sweep_rng = rng.child("sweep");
    mwg_sweep(next.state, y, mwg, sweep_rng);
    RngStream pred_rng = rng.child("pred");
    refresh_predictions(next, pred_rng);
    return next;
}

void MsvCsoF2::finish_inner(Inner& inner, RngStream& rng) const {
    const Eigen::Index last = inner.state.u.horizon() - 1;
    RngStream pa = rng.child("pred-a");
    inner.pred_a = predictive_mean(inner.state.theta, inner.state.chi, inner.state.u.X.col(last),
                                   inner.state.u.Psi.col(last), cfg.horizon, cfg.pred_batch, pa);
    if (cfg.independent_batches) {
        RngStream pb = rng.child("pred-b");
        inner.pred_b = predictive_mean(inner.state.theta, inner.state.chi,
                                       inner.state.u.X.col(last), inner.state.u.Psi.col(last),
                                       cfg.horizon, cfg.pred_batch, pb);
    } else {
        inner.pred_b = inner.pred_a;
    }
    RngStream fwd = rng.child("fwd");
    ForwardSample fs = forward_simulate(inner.state.theta, inner.state.chi,
                                        inner.state.u.X.col(last), inner.state.u.Psi.col(last),
                                        cfg.horizon, fwd);
    inner.r_future = std::move(fs.r);
}

MsvCsoF2::Inner MsvCsoF2::sample_initial(const Outer& theta, const Eigen::VectorXd&,
                                         RngStream& rng) const {
    Inner inner;
    inner.state.theta = theta;
    RngStream rc = rng.child("chi");
    inner.state.chi = sample_chi_prior(n_assets, n_factors, rc);
    RngStream ru = rng.child("u");
    inner.state.u = simulate_latents(theta, y.cols(), ru);
    RngStream fin = rng.child("finish");
    finish_inner(inner, fin);
    return inner;
}

MsvCsoF2::Inner MsvCsoF2::inner_step(const Outer&, const Inner& x, const Eigen::VectorXd&,
                                     RngStream& rng) const {
    Inner next = x;
    MwgConfig mwg = cfg.mwg;
    mwg.update_theta = false;
    mwg.update_chi = true;
    RngStream sweep_rng = rng.child("sweep");
    mwg_sweep(next.state, y, mwg, sweep_rng);
    RngStream fin = rng.child("finish");
    finish_inner(next, fin);
    return next;
}

}  // namespace ucso::msv
