#pragma once

#include "ucso/msv/mwg.hpp"
#include "ucso/msv/portfolio.hpp"

namespace ucso::msv {

struct PortfolioConfig {
    double zeta = 20.0;
    Eigen::Index horizon = 5;  // T'
    int pred_batch = 64;
    // draw two independent predictive-mean batches so the quadratic penalty
    // is estimated without plug-in bias
    bool independent_batches = false;
    MwgConfig mwg;
};

// Framework 1: Z = (theta, u_{1:T}) moved by a full-posterior MwG sweep; the
// inner draw is exact forward simulation of (U, R) over the horizon, i.i.d.,
// so the multilevel machinery degenerates to plain averaging.
struct MsvCsoF1 {
    Eigen::MatrixXd y;  // log(1 + r), p x T
    int n_factors = 1;  // K
    PortfolioConfig cfg;

    struct Outer {
        MwgState state;
        Eigen::MatrixXd pred_a, pred_b;  // p x T'
    };
    struct Inner {
        Eigen::MatrixXd r_future;  // p x T'
        MsvLatent u_future;
    };

    int assets() const { return int(y.rows()); }
    int param_dim() const { return assets(); }
    int output_dim() const { return 1; }

    // builds an initial outer state from prior draws and refreshes its
    // predictive means
    Outer make_initial_outer(RngStream& rng) const;

    Eigen::VectorXd eval_g(const Outer& z, const Inner& x, const Eigen::VectorXd& xi) const {
        return Eigen::VectorXd::Constant(
            1, payoff_g(x.r_future, z.pred_a, z.pred_b, softmax_weights(xi), cfg.zeta));
    }
    Eigen::MatrixXd eval_grad_g(const Outer& z, const Inner& x, const Eigen::VectorXd& xi) const {
        return grad_payoff_wrt_logits(x.r_future, z.pred_a, z.pred_b, xi, cfg.zeta).transpose();
    }
    Eigen::VectorXd eval_grad_f(const Outer&, const Eigen::VectorXd&) const {
        return Eigen::VectorXd::Constant(1, 1.0);
    }

    Inner sample_initial(const Outer& z, const Eigen::VectorXd&, RngStream& rng) const;
    Inner inner_step(const Outer& z, const Inner&, const Eigen::VectorXd& xi,
                     RngStream& rng) const {
        return sample_initial(z, xi, rng);  // i.i.d. inner sampling
    }
    Outer outer_step(const Outer& z, RngStream& rng) const;

private:
    void refresh_predictions(Outer& z, RngStream& rng) const;
};

// Framework 2: Z~ = theta~ drawn i.i.d. from its prior; the inner kernel is a
// MwG sweep over (u_{1:T}, chi) composed with forward predictive simulation,
// and each inner state carries its own predictive means.
struct MsvCsoF2 {
    Eigen::MatrixXd y;  // log(1 + r), p x T
    int n_assets = 0;
    int n_factors = 1;  // K
    PortfolioConfig cfg;

    using Outer = MsvTheta;
    struct Inner {
        MwgState state;  // theta copy + (u, chi)
        Eigen::MatrixXd r_future;
        Eigen::MatrixXd pred_a, pred_b;
    };

    int param_dim() const { return n_assets; }
    int output_dim() const { return 1; }

    Eigen::VectorXd eval_g(const Outer&, const Inner& x, const Eigen::VectorXd& xi) const {
        return Eigen::VectorXd::Constant(
            1, payoff_g(x.r_future, x.pred_a, x.pred_b, softmax_weights(xi), cfg.zeta));
    }
    Eigen::MatrixXd eval_grad_g(const Outer&, const Inner& x, const Eigen::VectorXd& xi) const {
        return grad_payoff_wrt_logits(x.r_future, x.pred_a, x.pred_b, xi, cfg.zeta).transpose();
    }
    Eigen::VectorXd eval_grad_f(const Outer&, const Eigen::VectorXd&) const {
        return Eigen::VectorXd::Constant(1, 1.0);
    }

    Inner sample_initial(const Outer& theta, const Eigen::VectorXd&, RngStream& rng) const;
    Inner inner_step(const Outer& theta, const Inner& x, const Eigen::VectorXd&,
                     RngStream& rng) const;
    Outer outer_step(const Outer&, RngStream& rng) const {
        RngStream r = rng.child("theta-prior");
        return sample_theta_prior(n_factors, r);
    }

private:
    void finish_inner(Inner& inner, RngStream& rng) const;
};

}  // namespace ucso::msv
