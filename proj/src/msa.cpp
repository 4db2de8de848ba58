#include "ucso/msa.hpp"

namespace ucso {

Eigen::MatrixXd estimate_parameter_mse(const std::vector<MsaTrajectory>& runs,
                                       const Eigen::VectorXd& reference,
                                       std::vector<bool>* absolute_component) {
    if (runs.empty()) throw std::invalid_argument("estimate_parameter_mse: no runs");
    const std::size_t n_steps = runs[0].steps.size();
    const int k = int(reference.size());
    for (const auto& run : runs)
        if (run.steps.size() != n_steps)
            throw std::invalid_argument("estimate_parameter_mse: runs differ in length");
    if (!reference.allFinite())
        throw std::invalid_argument("estimate_parameter_mse: non-finite reference");

    std::vector<bool> absolute(std::size_t(k), false);
    for (int i = 0; i < k; ++i)
        if (reference(i) == 0.0) absolute[std::size_t(i)] = true;

    Eigen::MatrixXd mse = Eigen::MatrixXd::Zero(Eigen::Index(n_steps), k);
    for (const auto& run : runs) {
        for (std::size_t n = 0; n < n_steps; ++n) {
            for (int i = 0; i < k; ++i) {
                double err = run.steps[n].xi(i) - reference(i);
                if (!absolute[std::size_t(i)]) err /= reference(i);
                mse(Eigen::Index(n), i) += err * err;
            }
        }
    }
    mse /= double(runs.size());
    if (absolute_component) *absolute_component = absolute;
    return mse;
}

}  // namespace ucso
