#include "ucso/harness/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace ucso::harness {

std::string ConfigError::join(const std::vector<std::string>& messages) {
    std::string out = "invalid configuration:";
    for (const auto& m : messages) out += "\n  " + m;
    return out;
}

ConfigError::ConfigError(std::vector<std::string> messages)
    : std::runtime_error(join(messages)), messages_(std::move(messages)) {}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::RelMseVsS: return "rel-mse-vs-S";
        case ExperimentKind::MsaConvergence: return "msa-convergence";
        case ExperimentKind::ObjectiveTrace: return "objective-trace";
        case ExperimentKind::LevelDecay: return "level-decay";
        case ExperimentKind::BacktestSynthetic: return "backtest-synthetic";
    }
    return "?";
}

std::vector<std::string> experiment_names() {
    return {"rel-mse-vs-S", "msa-convergence", "objective-trace", "level-decay",
            "backtest-synthetic"};
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Raw key-value store: section -> key -> value, duplicates rejected.
struct RawConfig {
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::vector<std::string> errors;
};

RawConfig tokenize(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                raw.errors.push_back("line " + std::to_string(lineno) + ": unterminated section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            raw.sections[section];  // empty sections are legal
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            raw.errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string path = section.empty() ? key : section + "." + key;
        if (key.empty()) {
            raw.errors.push_back("line " + std::to_string(lineno) + ": empty key");
            continue;
        }
        auto [it, inserted] = raw.sections[section].emplace(key, value);
        (void)it;
        if (!inserted) raw.errors.push_back(path + ": duplicate key");
    }
    return raw;
}

// Consumes keys from one section; whatever is left at the end is unknown.
class SectionReader {
public:
    SectionReader(RawConfig& raw, std::string section, std::vector<std::string>& errors)
        : raw_(raw), section_(std::move(section)), errors_(errors) {}

    ~SectionReader() {
        auto it = raw_.sections.find(section_);
        if (it == raw_.sections.end()) return;
        for (const auto& [key, value] : it->second) errors_.push_back(path(key) + ": unknown key");
        raw_.sections.erase(it);
    }

    bool take(const std::string& key, std::string& out) {
        auto it = raw_.sections.find(section_);
        if (it == raw_.sections.end()) return false;
        auto kv = it->second.find(key);
        if (kv == it->second.end()) return false;
        out = kv->second;
        it->second.erase(kv);
        return true;
    }

    void real(const std::string& key, double& out) {
        std::string v;
        if (!take(key, v)) return;
        try {
            std::size_t pos = 0;
            double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            out = d;
        } catch (const std::exception&) {
            errors_.push_back(path(key) + ": expected a real number, got '" + v + "'");
        }
    }

    void integer(const std::string& key, long long& out) {
        std::string v;
        if (!take(key, v)) return;
        try {
            std::size_t pos = 0;
            long long i = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            out = i;
        } catch (const std::exception&) {
            errors_.push_back(path(key) + ": expected an integer, got '" + v + "'");
        }
    }

    void integer(const std::string& key, int& out) {
        long long v = out;
        integer(key, v);
        out = int(v);
    }

    void unsigned64(const std::string& key, std::uint64_t& out) {
        std::string v;
        if (!take(key, v)) return;
        try {
            std::size_t pos = 0;
            unsigned long long i = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            out = i;
        } catch (const std::exception&) {
            errors_.push_back(path(key) + ": expected a non-negative integer, got '" + v + "'");
        }
    }

    void boolean(const std::string& key, bool& out) {
        std::string v;
        if (!take(key, v)) return;
        if (v == "true" || v == "1")
            out = true;
        else if (v == "false" || v == "0")
            out = false;
        else
            errors_.push_back(path(key) + ": expected true/false, got '" + v + "'");
    }

    void text(const std::string& key, std::string& out) { take(key, out); }

    template <typename T>
    void int_list(const std::string& key, std::vector<T>& out) {
        std::string v;
        if (!take(key, v)) return;
        std::vector<T> parsed;
        std::istringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            try {
                std::size_t pos = 0;
                long long i = std::stoll(item, &pos);
                if (pos != item.size()) throw std::invalid_argument(item);
                parsed.push_back(T(i));
            } catch (const std::exception&) {
                errors_.push_back(path(key) + ": expected a comma-separated integer list, got '" + v +
                                  "'");
                return;
            }
        }
        if (parsed.empty()) {
            errors_.push_back(path(key) + ": list is empty");
            return;
        }
        out = std::move(parsed);
    }

    std::string path(const std::string& key) const {
        return section_.empty() ? key : section_ + "." + key;
    }

private:
    RawConfig& raw_;
    std::string section_;
    std::vector<std::string>& errors_;
};

void check(bool ok, const std::string& message, std::vector<std::string>& errors) {
    if (!ok) errors.push_back(message);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    RawConfig raw = tokenize(text);
    std::vector<std::string> errors = std::move(raw.errors);
    ExperimentConfig cfg;
    cfg.source_text = text;

    {
        SectionReader top(raw, "", errors);
        std::string kind;
        if (top.take("experiment", kind)) {
            if (kind == "rel-mse-vs-S")
                cfg.kind = ExperimentKind::RelMseVsS;
            else if (kind == "msa-convergence")
                cfg.kind = ExperimentKind::MsaConvergence;
            else if (kind == "objective-trace")
                cfg.kind = ExperimentKind::ObjectiveTrace;
            else if (kind == "level-decay")
                cfg.kind = ExperimentKind::LevelDecay;
            else if (kind == "backtest-synthetic")
                cfg.kind = ExperimentKind::BacktestSynthetic;
            else
                errors.push_back("experiment: unknown kind '" + kind + "'");
        } else {
            errors.push_back("experiment: required key missing");
        }
    }
    {
        SectionReader model(raw, "model", errors);
        std::string kind;
        if (model.take("kind", kind)) {
            if (kind == "ssm")
                cfg.model = ModelKind::Ssm;
            else if (kind == "msv")
                cfg.model = ModelKind::Msv;
            else if (kind == "toy")
                cfg.model = ModelKind::Toy;
            else
                errors.push_back("model.kind: unknown model '" + kind + "'");
        }
    }
    {
        SectionReader s(raw, "ssm", errors);
        s.real("sigma", cfg.ssm.sigma);
        s.real("mu", cfg.ssm.mu);
        s.real("Sigma", cfg.ssm.Sigma);
        s.integer("horizon", cfg.ssm.horizon);
        s.integer("dof", cfg.ssm.dof);
        s.int_list("model_set", cfg.ssm.model_set);
        s.integer("n_particles", cfg.ssm.n_particles);
        s.integer("sweeps_per_step", cfg.ssm.sweeps_per_step);
        s.unsigned64("data_seed", cfg.ssm.data_seed);
        check(cfg.ssm.sigma > 0, "ssm.sigma: must be > 0", errors);
        check(cfg.ssm.Sigma > 0, "ssm.Sigma: must be > 0", errors);
        check(cfg.ssm.horizon >= 1, "ssm.horizon: must be >= 1", errors);
        check(cfg.ssm.dof >= 0, "ssm.dof: must be >= 0 (0 = Gaussian)", errors);
        check(cfg.ssm.n_particles >= 2, "ssm.n_particles: must be >= 2", errors);
        check(cfg.ssm.sweeps_per_step >= 1, "ssm.sweeps_per_step: must be >= 1", errors);
        for (long long m : cfg.ssm.model_set)
            check(m >= 0, "ssm.model_set: entries must be >= 0 (0 = Gaussian)", errors);
    }
    {
        SectionReader s(raw, "msv", errors);
        s.integer("assets", cfg.msv.assets);
        s.integer("factors", cfg.msv.factors);
        s.integer("history", cfg.msv.history);
        s.integer("horizon_future", cfg.msv.horizon_future);
        s.real("zeta", cfg.msv.zeta);
        s.integer("pred_batch", cfg.msv.pred_batch);
        s.boolean("independent_batches", cfg.msv.independent_batches);
        s.integer("framework", cfg.msv.framework);
        s.unsigned64("instance_seed", cfg.msv.instance_seed);
        check(cfg.msv.assets >= 2, "msv.assets: must be >= 2", errors);
        check(cfg.msv.factors >= 1, "msv.factors: must be >= 1", errors);
        check(cfg.msv.factors <= cfg.msv.assets, "msv.factors: must be <= msv.assets", errors);
        check(cfg.msv.history >= 2, "msv.history: must be >= 2", errors);
        check(cfg.msv.horizon_future >= 1, "msv.horizon_future: must be >= 1", errors);
        check(cfg.msv.zeta >= 0, "msv.zeta: must be >= 0", errors);
        check(cfg.msv.pred_batch >= 1, "msv.pred_batch: must be >= 1", errors);
        check(cfg.msv.framework == 1 || cfg.msv.framework == 2,
              "msv.framework: must be 1 or 2", errors);
    }
    {
        SectionReader s(raw, "toy", errors);
        s.real("m01", cfg.toy.m01);
        s.real("m10", cfg.toy.m10);
        s.real("eta0", cfg.toy.eta0);
        s.real("g0", cfg.toy.g0);
        s.real("g1", cfg.toy.g1);
        s.real("xi", cfg.toy.xi);
        check(cfg.toy.m01 > 0 && cfg.toy.m01 < 1, "toy.m01: must lie in (0, 1)", errors);
        check(cfg.toy.m10 > 0 && cfg.toy.m10 < 1, "toy.m10: must lie in (0, 1)", errors);
        check(cfg.toy.eta0 > 0 && cfg.toy.eta0 < 1, "toy.eta0: must lie in (0, 1)", errors);
    }
    {
        SectionReader s(raw, "estimator", errors);
        std::string dist;
        if (s.take("distribution", dist)) {
            if (dist == "geometric")
                cfg.estimator.dist = DistKind::Geometric;
            else if (dist == "truncated-log")
                cfg.estimator.dist = DistKind::TruncatedLog;
            else if (dist == "point-mass")
                cfg.estimator.dist = DistKind::PointMass;
            else
                errors.push_back("estimator.distribution: unknown law '" + dist + "'");
        }
        s.real("beta", cfg.estimator.beta);
        s.integer("q", cfg.estimator.q);
        s.integer("l_max", cfg.estimator.l_max);
        s.integer("level", cfg.estimator.level);
        std::string weighting;
        if (s.take("weighting", weighting)) {
            if (weighting == "normalized")
                cfg.estimator.weighting = WeightingMode::Normalized;
            else if (weighting == "paper-literal")
                cfg.estimator.weighting = WeightingMode::PaperLiteral;
            else
                errors.push_back("estimator.weighting: unknown mode '" + weighting + "'");
        }
        s.int_list("s_grid", cfg.estimator.s_grid);
        s.integer("cost_cap", cfg.estimator.cost_cap);
        check(cfg.estimator.beta > 0 && cfg.estimator.beta < 1,
              "estimator.beta: must lie in (0, 1)", errors);
        check(cfg.estimator.q >= 1, "estimator.q: must be >= 1", errors);
        check(cfg.estimator.l_max >= 1, "estimator.l_max: must be >= 1", errors);
        check(cfg.estimator.level >= 1, "estimator.level: must be >= 1", errors);
        check(cfg.estimator.cost_cap >= 4, "estimator.cost_cap: must be >= 4", errors);
        for (int s_val : cfg.estimator.s_grid)
            check(s_val >= 1, "estimator.s_grid: entries must be >= 1", errors);
    }
    {
        SectionReader s(raw, "replication", errors);
        s.integer("replicates", cfg.replication.replicates);
        s.integer("runs", cfg.replication.runs);
        s.unsigned64("seed", cfg.replication.seed);
        s.integer("reference_draws", cfg.replication.reference_draws);
        check(cfg.replication.replicates >= 2, "replication.replicates: must be >= 2", errors);
        check(cfg.replication.runs >= 2, "replication.runs: must be >= 2", errors);
        check(cfg.replication.reference_draws >= 0,
              "replication.reference_draws: must be >= 0 (0 = automatic)", errors);
    }
    {
        SectionReader s(raw, "msa", errors);
        s.integer("iterations", cfg.msa.iterations);
        s.integer("s_count", cfg.msa.s_count);
        s.integer("outer_steps_per_update", cfg.msa.outer_steps_per_update);
        s.real("gamma0", cfg.msa.gamma0);
        s.real("gamma0_sigma", cfg.msa.gamma0_sigma);
        s.real("gamma0_mu_Sigma", cfg.msa.gamma0_mu_Sigma);
        s.integer("offset", cfg.msa.offset);
        s.real("exponent", cfg.msa.exponent);
        s.boolean("minimize", cfg.msa.minimize);
        s.real("clip", cfg.msa.clip);
        s.real("init_sigma", cfg.msa.init_sigma);
        s.real("init_mu", cfg.msa.init_mu);
        s.real("init_Sigma", cfg.msa.init_Sigma);
        s.integer("record_every", cfg.msa.record_every);
        s.integer("objective_batch", cfg.msa.objective_batch);
        check(cfg.msa.iterations >= 1, "msa.iterations: must be >= 1", errors);
        check(cfg.msa.s_count >= 1, "msa.s_count: must be >= 1", errors);
        check(cfg.msa.outer_steps_per_update >= 1, "msa.outer_steps_per_update: must be >= 1",
              errors);
        check(cfg.msa.gamma0 > 0, "msa.gamma0: must be > 0", errors);
        check(cfg.msa.gamma0_sigma > 0, "msa.gamma0_sigma: must be > 0", errors);
        check(cfg.msa.gamma0_mu_Sigma > 0, "msa.gamma0_mu_Sigma: must be > 0", errors);
        check(cfg.msa.offset >= 0, "msa.offset: must be >= 0", errors);
        check(cfg.msa.exponent > 0.5 && cfg.msa.exponent <= 1.0,
              "msa.exponent: must lie in (0.5, 1]", errors);
        check(cfg.msa.clip > 0, "msa.clip: must be > 0", errors);
        check(cfg.msa.init_sigma > 0, "msa.init_sigma: must be > 0", errors);
        check(cfg.msa.init_Sigma > 0, "msa.init_Sigma: must be > 0", errors);
        check(cfg.msa.record_every >= 1, "msa.record_every: must be >= 1", errors);
        check(cfg.msa.objective_batch >= 1, "msa.objective_batch: must be >= 1", errors);
    }
    {
        SectionReader s(raw, "output", errors);
        s.text("directory", cfg.output.directory);
        s.text("formats", cfg.output.formats);
        check(cfg.output.formats == "csv" || cfg.output.formats == "csv+plot",
              "output.formats: must be csv or csv+plot", errors);
        check(!cfg.output.directory.empty(), "output.directory: must not be empty", errors);
    }
    for (const auto& [name, kv] : raw.sections) {
        (void)kv;
        if (!name.empty()) errors.push_back(name + ": unknown section");
    }

    // cross-field constraints
    if (cfg.kind == ExperimentKind::ObjectiveTrace || cfg.kind == ExperimentKind::BacktestSynthetic)
        check(cfg.model == ModelKind::Msv,
              "model.kind: " + to_string(cfg.kind) + " requires the msv model", errors);
    if (cfg.kind == ExperimentKind::MsaConvergence)
        check(cfg.model != ModelKind::Msv,
              "model.kind: msa-convergence supports ssm and toy models", errors);

    if (!errors.empty()) throw ConfigError(std::move(errors));
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path + ": cannot open config file"});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace ucso::harness
