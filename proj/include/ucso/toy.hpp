#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "ucso/estimator.hpp"
#include "ucso/rng.hpp"

namespace ucso::toy {

// Fully enumerable two-state CSO instance.  The inner chain lives on {0,1},
// the outer chain is uniform on a finite set, g(z,x,xi) = xi * g_table(z,x)
// with k = d = 1, and f(z,u) = u^2 so the finite-N plug-in carries real bias.
struct DiscreteCso {
    Eigen::Matrix2d kernel;   // row-stochastic, all entries >= eps > 0
    Eigen::Vector2d initial;  // eta
    int n_outer = 1;
    std::vector<std::array<double, 2>> g_table;  // per outer state

    using Outer = int;
    using Inner = int;

    int param_dim() const { return 1; }
    int output_dim() const { return 1; }

    void validate() const;

    Eigen::VectorXd eval_g(int z, int x, const Eigen::VectorXd& xi) const {
        return Eigen::VectorXd::Constant(1, xi(0) * g_table[std::size_t(z)][std::size_t(x)]);
    }
    Eigen::MatrixXd eval_grad_g(int z, int x, const Eigen::VectorXd&) const {
        return Eigen::MatrixXd::Constant(1, 1, g_table[std::size_t(z)][std::size_t(x)]);
    }
    Eigen::VectorXd eval_grad_f(int, const Eigen::VectorXd& u) const { return 2.0 * u; }

    int sample_initial(int, const Eigen::VectorXd&, RngStream& rng) const {
        return rng.uniform() < initial(0) ? 0 : 1;
    }
    int inner_step(int, int x, const Eigen::VectorXd&, RngStream& rng) const {
        return rng.uniform() < kernel(x, 0) ? 0 : 1;
    }
    int outer_step(int, RngStream& rng) const { return int(rng.uniform_index(std::size_t(n_outer))); }

    // Stationary probability of inner state 1: m01 / (m01 + m10).
    double stationary_one() const;
};

// H(z, xi) from the exact stationary law of the two-state chain.
double exact_H(const DiscreteCso& instance, int z, double xi);

// Exact expectation of the level-l combined term, enumerating every segment
// path (initial draw and transitions) with its exact probability.
double exhaustive_term_mean(const DiscreteCso& instance, int z, double xi, int level,
                            WeightingMode mode);

// Exact E[estimate_H] for a truncated level law, summing over every level draw
// and every joint segment path.  Tractable for L_max <= 2.
double exhaustive_estimator_mean(const DiscreteCso& instance, int z, double xi,
                                 const LevelDistribution& dist, WeightingMode mode);

// Exact E[estimate_H^2], same enumeration.
double exhaustive_estimator_second_moment(const DiscreteCso& instance, int z, double xi,
                                          const LevelDistribution& dist, WeightingMode mode);

}  // namespace ucso::toy
