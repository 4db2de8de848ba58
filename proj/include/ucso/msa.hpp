#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucso/estimator.hpp"

namespace ucso {

// gamma_n = gamma0_block * (offset + n)^{-exponent}, Robbins-Monro for
// exponent in (0.5, 1].
struct StepSchedule {
    std::map<std::string, double> gamma0_per_block;
    int offset = 100;
    double exponent = 0.6;
    // block name per parameter component
    std::vector<std::string> component_block;

    void validate(int k) const {
        if (!(exponent > 0.5 && exponent <= 1.0))
            throw std::invalid_argument("step schedule exponent must lie in (0.5, 1]");
        if (offset < 0) throw std::invalid_argument("step schedule offset must be >= 0");
        if (int(component_block.size()) != k)
            throw std::invalid_argument("step schedule must name a block per component");
        for (const auto& name : component_block)
            if (!gamma0_per_block.count(name))
                throw std::invalid_argument("step schedule block without gamma0: " + name);
        for (const auto& [name, g0] : gamma0_per_block)
            if (!(g0 > 0.0)) throw std::invalid_argument("gamma0 must be positive for block " + name);
    }
};

inline double step_size(const StepSchedule& schedule, const std::string& block, int n) {
    auto it = schedule.gamma0_per_block.find(block);
    if (it == schedule.gamma0_per_block.end())
        throw std::invalid_argument("unknown step-size block: " + block);
    return it->second * std::pow(double(schedule.offset + n), -schedule.exponent);
}

// Per-component identity/log coordinate change; log components stay positive
// by construction and the update is chain-ruled through d(xi)/d(xi~) = xi.
struct Reparameterization {
    enum class Transform { Identity, Log };
    std::vector<Transform> transforms;

    static Reparameterization identity(int k) {
        return {std::vector<Transform>(std::size_t(k), Transform::Identity)};
    }

    Eigen::VectorXd forward(const Eigen::VectorXd& xi) const {
        Eigen::VectorXd out = xi;
        for (int i = 0; i < xi.size(); ++i)
            if (transforms[std::size_t(i)] == Transform::Log) {
                if (!(xi(i) > 0.0))
                    throw std::domain_error("log reparameterization needs a positive component");
                out(i) = std::log(xi(i));
            }
        return out;
    }
    Eigen::VectorXd inverse(const Eigen::VectorXd& xi_tilde) const {
        Eigen::VectorXd out = xi_tilde;
        for (int i = 0; i < xi_tilde.size(); ++i)
            if (transforms[std::size_t(i)] == Transform::Log) out(i) = std::exp(xi_tilde(i));
        return out;
    }
    // d(xi)/d(xi~) evaluated at constrained xi
    Eigen::VectorXd jacobian(const Eigen::VectorXd& xi) const {
        Eigen::VectorXd out = Eigen::VectorXd::Ones(xi.size());
        for (int i = 0; i < xi.size(); ++i)
            if (transforms[std::size_t(i)] == Transform::Log) out(i) = xi(i);
        return out;
    }
};

struct MsaStepRecord {
    int n = 0;
    Eigen::VectorXd xi;        // constrained
    Eigen::VectorXd xi_tilde;  // unconstrained
    Eigen::VectorXd gamma;     // per component
    Eigen::VectorXd gradient;  // averaged estimate used for the update
    bool clipped = false;
};

struct MsaTrajectory {
    std::vector<MsaStepRecord> steps;  // steps[0] is the initial point

    Eigen::MatrixXd iterate_matrix() const {
        Eigen::MatrixXd m(steps.size(), steps.empty() ? 0 : steps[0].xi.size());
        for (std::size_t i = 0; i < steps.size(); ++i) m.row(Eigen::Index(i)) = steps[i].xi;
        return m;
    }
};

struct MsaOptions {
    int iterations = 100;
    int s_count = 1;                  // estimators averaged per step
    int outer_steps_per_update = 1;   // K composed with itself
    WeightingMode mode = WeightingMode::Normalized;
    double clip = 1e6;                // per-component gradient clip
    bool minimize = false;            // flips the update sign
};

// Markovian stochastic approximation: alternate K-moves of the outer state
// with ascent steps xi_n = xi_{n-1} + gamma_n H^(z_n, xi_{n-1}) performed in
// unconstrained coordinates.
template <class Model>
MsaTrajectory msa_run(const Model& model, const Eigen::VectorXd& xi0,
                      const typename Model::Outer& z0, const StepSchedule& schedule,
                      const Reparameterization& reparam, const LevelDistribution& dist,
                      const MsaOptions& opt, RngStream& rng) {
    const int k = model.param_dim();
    schedule.validate(k);
    if (opt.iterations < 1) throw std::invalid_argument("msa_run: iterations < 1");

    MsaTrajectory traj;
    traj.steps.reserve(std::size_t(opt.iterations) + 1);

    Eigen::VectorXd xi = xi0;
    Eigen::VectorXd xi_tilde = reparam.forward(xi);
    typename Model::Outer z = z0;

    MsaStepRecord init;
    init.n = 0;
    init.xi = xi;
    init.xi_tilde = xi_tilde;
    init.gamma = Eigen::VectorXd::Zero(k);
    init.gradient = Eigen::VectorXd::Zero(k);
    traj.steps.push_back(init);

    const double sign = opt.minimize ? -1.0 : 1.0;
    for (int n = 1; n <= opt.iterations; ++n) {
        RngStream step_rng = rng.child(std::uint64_t(n));
        RngStream outer_rng = step_rng.child("outer");
        for (int j = 0; j < opt.outer_steps_per_update; ++j) z = model.outer_step(z, outer_rng);

        RngStream grad_rng = step_rng.child("grad");
        Eigen::VectorXd grad = estimate_H_averaged(model, z, xi, dist, opt.mode, opt.s_count, grad_rng);

        MsaStepRecord rec;
        rec.n = n;
        rec.gradient = grad;
        for (int i = 0; i < k; ++i) {
            if (std::abs(grad(i)) > opt.clip) {
                grad(i) = std::copysign(opt.clip, grad(i));
                rec.clipped = true;
            }
        }
        Eigen::VectorXd gamma(k);
        for (int i = 0; i < k; ++i)
            gamma(i) = step_size(schedule, schedule.component_block[std::size_t(i)], n);

        xi_tilde += sign * gamma.cwiseProduct(grad.cwiseProduct(reparam.jacobian(xi)));
        xi = reparam.inverse(xi_tilde);
        if (!xi.allFinite()) {
            rec.xi = xi;
            rec.xi_tilde = xi_tilde;
            rec.gamma = gamma;
            traj.steps.push_back(rec);
            throw std::runtime_error("msa_run: non-finite iterate at step " + std::to_string(n));
        }
        rec.xi = xi;
        rec.xi_tilde = xi_tilde;
        rec.gamma = gamma;
        traj.steps.push_back(rec);
    }
    return traj;
}

// Per-iteration, per-component relative MSE across runs against a reference.
// Zero reference components fall back to absolute MSE; `absolute_component`
// reports which did.
Eigen::MatrixXd estimate_parameter_mse(const std::vector<MsaTrajectory>& runs,
                                       const Eigen::VectorXd& reference,
                                       std::vector<bool>* absolute_component = nullptr);

}  // namespace ucso
