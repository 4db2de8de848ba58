#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ucso/estimator.hpp"

namespace ucso::harness {

// All parse/validation problems for one file, each message naming the
// offending config path ("estimator.beta: ...").
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> messages);
    const std::vector<std::string>& messages() const { return messages_; }

private:
    static std::string join(const std::vector<std::string>& messages);
    std::vector<std::string> messages_;
};

enum class ExperimentKind {
    RelMseVsS,
    MsaConvergence,
    ObjectiveTrace,
    LevelDecay,
    BacktestSynthetic,
};
enum class ModelKind { Ssm, Msv, Toy };
enum class DistKind { Geometric, TruncatedLog, PointMass };

std::string to_string(ExperimentKind kind);
std::vector<std::string> experiment_names();

struct SsmBlock {
    double sigma = 0.3, mu = 0.95, Sigma = 0.2;
    long long horizon = 30;
    long long dof = 0;  // observation model used to simulate the dataset; 0 = Gaussian
    std::vector<long long> model_set{0};
    int n_particles = 10;
    int sweeps_per_step = 1;
    std::uint64_t data_seed = 1;
};

struct MsvBlock {
    int assets = 20;
    int factors = 5;
    long long history = 60;
    long long horizon_future = 5;
    double zeta = 20.0;
    int pred_batch = 64;
    bool independent_batches = false;
    int framework = 2;
    std::uint64_t instance_seed = 1;
};

struct ToyBlock {
    double m01 = 0.3, m10 = 0.2;  // off-diagonal inner kernel entries
    double eta0 = 0.5;            // initial mass on state 0
    double g0 = 1.0, g1 = 2.5;    // g table for the single outer state
    double xi = 1.3;              // evaluation point
};

struct EstimatorBlock {
    DistKind dist = DistKind::TruncatedLog;
    double beta = 0.7;
    int q = 4;
    int l_max = 10;
    int level = 1;  // point-mass
    WeightingMode weighting = WeightingMode::Normalized;
    std::vector<int> s_grid{1, 2, 4, 8, 16, 32, 64};
    long long cost_cap = 1LL << 26;  // transitions per estimate; exceeding marks the run truncated
};

struct ReplicationBlock {
    int replicates = 200;
    int runs = 20;
    std::uint64_t seed = 42;
    long long reference_draws = 0;  // self-reference size; 0 = 16 * replicates * max S
};

struct MsaBlock {
    int iterations = 1000;
    int s_count = 5;
    int outer_steps_per_update = 1;
    double gamma0 = 1.0;
    double gamma0_sigma = 0.1;     // ssm per-block overrides
    double gamma0_mu_Sigma = 2.0;
    int offset = 100;
    double exponent = 0.6;
    bool minimize = false;
    double clip = 1e6;
    double init_sigma = 0.5477225575051661;  // sqrt(0.3)
    double init_mu = 0.5;
    double init_Sigma = 0.4472135954999579;  // sqrt(0.2)
    int record_every = 10;
    int objective_batch = 8;  // fresh draws per objective evaluation
};

struct OutputBlock {
    std::string directory = "out";
    std::string formats = "csv";  // csv | csv+plot
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::RelMseVsS;
    ModelKind model = ModelKind::Ssm;
    SsmBlock ssm;
    MsvBlock msv;
    ToyBlock toy;
    EstimatorBlock estimator;
    ReplicationBlock replication;
    MsaBlock msa;
    OutputBlock output;
    std::string source_text;  // raw config text, hashed into the manifest
};

// Parses the nested key-value format ([section] headers, key = value lines,
// '#' comments).  Unknown sections/keys, bad literals and out-of-domain
// values are all collected and thrown together as one ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace ucso::harness
