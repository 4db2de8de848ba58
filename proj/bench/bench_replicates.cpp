#include <chrono>
#include <cstdio>
#include <vector>

#include "ucso/estimator.hpp"
#include "ucso/parallel.hpp"
#include "ucso/ssm/adapter.hpp"

// Times the replicate loop serially and with the OpenMP pool, and verifies the
// two runs agree bit for bit.

using namespace ucso;

int main() {
    ssm::SsmCsoModel model;
    ssm::SsmParams truth{0.3, 0.95, 0.2};
    RngStream data_rng(7);
    model.data = ssm::simulate(truth, ssm::ModelIndex::gaussian_tag(), 30, data_rng);
    model.model_set = {ssm::ModelIndex::gaussian_tag()};
    model.pgas.n_particles = 10;

    const Eigen::VectorXd xi = truth.as_vector();
    const LevelDistribution dist = LevelDistribution::truncated_log(4, 8);
    const std::size_t n = 400;

    RngStream root(11);
    std::vector<RngStream> streams;
    streams.reserve(n);
    for (std::size_t i = 0; i < n; ++i) streams.push_back(root.child(i));

    auto run = [&](int workers, std::vector<Eigen::VectorXd>& out) {
        out.assign(n, Eigen::VectorXd());
        const auto t0 = std::chrono::steady_clock::now();
        for_each_replicate(n, workers, [&](std::size_t i) {
            RngStream stream = streams[i];
            out[i] = estimate_H(model, model.model_set[0], xi, dist, WeightingMode::Normalized,
                                stream)
                         .value;
        });
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    std::vector<Eigen::VectorXd> serial, parallel;
    const double t_serial = run(1, serial);
    const int workers = hardware_workers();
    const double t_parallel = run(workers, parallel);

    bool identical = true;
    for (std::size_t i = 0; i < n; ++i)
        identical = identical && (serial[i].array() == parallel[i].array()).all();

    std::printf("replicates:        %zu\n", n);
    std::printf("serial:            %.3f s\n", t_serial);
    std::printf("parallel (%2d):     %.3f s\n", workers, t_parallel);
    std::printf("speedup:           %.2fx\n", t_serial / t_parallel);
    std::printf("bitwise identical: %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
