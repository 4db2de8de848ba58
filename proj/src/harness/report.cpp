#include "ucso/harness/report.hpp"

#include <cmath>
#include <stdexcept>

namespace ucso::harness {

MseReport decompose_mse(const Eigen::MatrixXd& replicates, const Eigen::VectorXd& reference,
                        const std::vector<std::string>& component_names) {
    const Eigen::Index r = replicates.rows(), d = replicates.cols();
    if (r < 2) throw std::invalid_argument("decompose_mse: need at least 2 replicates");
    if (reference.size() != d || Eigen::Index(component_names.size()) != d)
        throw std::invalid_argument("decompose_mse: component count mismatch");
    if (!reference.allFinite()) throw std::invalid_argument("decompose_mse: non-finite reference");

    MseReport report;
    report.replicates = int(r);
    for (Eigen::Index j = 0; j < d; ++j) {
        MseRow row;
        row.component = component_names[std::size_t(j)];
        row.mean = replicates.col(j).mean();
        const double bias = row.mean - reference(j);
        row.bias2 = bias * bias;
        row.variance = (replicates.col(j).array() - row.mean).square().sum() / double(r - 1);
        row.mse = row.bias2 + row.variance;
        row.se_mean = std::sqrt(row.variance / double(r));
        const double ref2 = reference(j) * reference(j);
        row.absolute = ref2 == 0.0;
        const double scale = row.absolute ? 1.0 : 1.0 / ref2;
        row.rel_bias2 = row.bias2 * scale;
        row.rel_variance = row.variance * scale;
        row.rel_mse = row.mse * scale;
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace ucso::harness
