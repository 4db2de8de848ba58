#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ucso::harness {

// One (component, abscissa) cell of a bias/variance decomposition.  `index`
// is whatever the experiment varies: S for the MSE-vs-S study, the iteration
// for convergence traces.
struct MseRow {
    std::string component;
    double index = 0.0;
    double mean = 0.0;
    double bias2 = 0.0;
    double variance = 0.0;  // unbiased sample variance of the replicate values
    double mse = 0.0;       // bias2 + variance by construction
    double rel_bias2 = 0.0;
    double rel_variance = 0.0;
    double rel_mse = 0.0;
    double se_mean = 0.0;  // sqrt(variance / R)
    bool absolute = false;  // reference component was zero: rel_* hold absolute values
};

struct MseReport {
    std::vector<MseRow> rows;
    int replicates = 0;
};

// bias = column mean - reference; relative quantities divided by reference^2,
// falling back to absolute mode (flagged) for zero reference components.
// `replicates` is R x d, one replicate estimate per row.
MseReport decompose_mse(const Eigen::MatrixXd& replicates, const Eigen::VectorXd& reference,
                        const std::vector<std::string>& component_names);

}  // namespace ucso::harness
