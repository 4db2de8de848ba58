#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ucso/harness/config.hpp"

namespace ucso::harness {

struct RunOptions {
    bool has_seed = false;
    std::uint64_t seed = 0;       // overrides replication.seed when has_seed
    std::string out_dir;          // overrides output.directory when non-empty
    std::string format;           // overrides output.formats when non-empty
    int workers = 1;
};

struct RunResult {
    bool ok = true;
    bool truncated = false;            // a per-estimate cost cap was hit
    std::string error;                 // failure record; partial results are flushed
    std::vector<std::string> outputs;  // files written, manifest last
};

// Runs one experiment deterministically from (config, master seed): equal
// inputs give byte-identical CSVs regardless of worker count.  The manifest
// carries config hash, seeds, runtimes and any failure record.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt);

}  // namespace ucso::harness
