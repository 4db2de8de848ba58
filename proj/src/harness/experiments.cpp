#include "ucso/harness/experiments.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <json.hpp>

#include "ucso/harness/emit.hpp"
#include "ucso/harness/report.hpp"
#include "ucso/msa.hpp"
#include "ucso/msv/adapter.hpp"
#include "ucso/msv/instance.hpp"
#include "ucso/parallel.hpp"
#include "ucso/ssm/adapter.hpp"
#include "ucso/ssm/kalman.hpp"
#include "ucso/toy.hpp"

namespace ucso::harness {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string config_hash(const std::string& text) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)hash_name(text));
    return buf;
}

LevelDistribution make_dist(const EstimatorBlock& e) {
    switch (e.dist) {
        case DistKind::Geometric: return LevelDistribution::geometric(e.beta);
        case DistKind::TruncatedLog: return LevelDistribution::truncated_log(e.q, e.l_max);
        case DistKind::PointMass: return LevelDistribution::point_mass(e.level);
    }
    throw std::logic_error("make_dist: unreachable");
}

toy::DiscreteCso make_toy(const ToyBlock& t) {
    toy::DiscreteCso inst;
    inst.kernel << 1.0 - t.m01, t.m01, t.m10, 1.0 - t.m10;
    inst.initial << t.eta0, 1.0 - t.eta0;
    inst.n_outer = 1;
    inst.g_table = {{t.g0, t.g1}};
    inst.validate();
    return inst;
}

ssm::SsmCsoModel make_ssm(const SsmBlock& s) {
    ssm::SsmCsoModel model;
    ssm::SsmParams truth{s.sigma, s.mu, s.Sigma};
    RngStream data_rng(s.data_seed);
    model.data = ssm::simulate(truth, ssm::ModelIndex{s.dof}, s.horizon, data_rng);
    for (long long m : s.model_set) model.model_set.push_back(ssm::ModelIndex{m});
    model.pgas.n_particles = s.n_particles;
    model.sweeps_per_step = s.sweeps_per_step;
    return model;
}

// Derivation of independent per-replicate streams is done serially up front so
// the stream tree is identical whatever the worker count.
std::vector<RngStream> fan_out(RngStream& parent, std::size_t n) {
    std::vector<RngStream> streams;
    streams.reserve(n);
    for (std::size_t i = 0; i < n; ++i) streams.push_back(parent.child(i));
    return streams;
}

struct Ctx {
    const ExperimentConfig& cfg;
    std::uint64_t seed;
    fs::path out_dir;
    bool plot = false;
    int workers = 1;
    json manifest;
    RunResult result;
    double t0 = 0.0;

    std::string file(const std::string& stem, const std::string& ext) const {
        return (out_dir / (to_string(cfg.kind) + "_seed" + std::to_string(seed) + "_" + stem +
                           "." + ext))
            .string();
    }
    void emit_table(const CsvTable& table, const std::string& stem) {
        const std::string path = file(stem, "csv");
        write_csv(table, path);
        result.outputs.push_back(path);
    }
    void emit_plot(const std::string& stem, const std::string& title, const std::string& xlabel,
                   const std::string& ylabel, const std::vector<PlotSeries>& series, bool log_x,
                   bool log_y) {
        if (!plot) return;
        const std::string path = file(stem, "svg");
        write_svg_plot(path, title, xlabel, ylabel, series, log_x, log_y);
        result.outputs.push_back(path);
    }
};

#ifndef NDEBUG
// Debug-build registry: every estimator draw must come from a distinct stream.
void check_stream_registry(const std::vector<std::vector<std::uint64_t>>& per_slot) {
    std::set<std::uint64_t> seen;
    for (const auto& ids : per_slot)
        for (std::uint64_t id : ids)
            if (!seen.insert(id).second)
                throw std::logic_error("rng stream reused across estimates");
}
#else
void check_stream_registry(const std::vector<std::vector<std::uint64_t>>&) {}
#endif

std::vector<std::string> mse_header() {
    return {"index",        "component", "mean",   "bias2",    "variance", "mse",
            "rel_bias2",    "rel_variance", "rel_mse", "se_mean", "absolute", "mean_cost"};
}

void append_mse_rows(CsvTable& table, const MseReport& report, double index, double mean_cost) {
    for (const auto& r : report.rows)
        table.rows.push_back({format_double(index), r.component, format_double(r.mean),
                              format_double(r.bias2), format_double(r.variance),
                              format_double(r.mse), format_double(r.rel_bias2),
                              format_double(r.rel_variance), format_double(r.rel_mse),
                              format_double(r.se_mean), r.absolute ? "1" : "0",
                              format_double(mean_cost)});
}

// ---------------------------------------------------------------- rel-mse-vs-S

template <class Model>
void rel_mse_core(Ctx& ctx, const Model& model, const typename Model::Outer& z0,
                  const Eigen::VectorXd& xi, const Eigen::VectorXd& reference,
                  const std::vector<std::string>& names) {
    const auto& est = ctx.cfg.estimator;
    const auto& rep = ctx.cfg.replication;
    const LevelDistribution dist = make_dist(est);
    const int k = model.param_dim();

    RngStream root(ctx.seed);
    RngStream grid_rng = root.child("rel-mse");

    CsvTable table;
    table.header = mse_header();
    std::map<std::string, PlotSeries> mse_series, bias_series, var_series;

    bool truncated = false;
    for (int s_count : est.s_grid) {
        RngStream s_rng = grid_rng.child(std::uint64_t(s_count));
        std::vector<RngStream> streams = fan_out(s_rng, std::size_t(rep.replicates));
        Eigen::MatrixXd values(rep.replicates, k);
        std::vector<double> costs(std::size_t(rep.replicates), 0.0);
        std::vector<std::vector<std::uint64_t>> ids(std::size_t(rep.replicates));
        std::vector<char> over_cap(std::size_t(rep.replicates), 0);

        for_each_replicate(std::size_t(rep.replicates), ctx.workers, [&](std::size_t r) {
            RngStream stream = streams[r];
            RngStream outer_rng = stream.child("outer");
            typename Model::Outer z = model.outer_step(z0, outer_rng);
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(k);
            for (int s = 0; s < s_count; ++s) {
                RngStream sub = stream.child(std::uint64_t(s));
                GradientEstimate e = estimate_H(model, z, xi, dist, est.weighting, sub);
                acc += e.value;
                costs[r] += double(e.inner_samples_used);
                ids[r].push_back(e.rng_stream_id);
                if (e.inner_samples_used > est.cost_cap) over_cap[r] = 1;
            }
            values.row(Eigen::Index(r)) = acc / double(s_count);
        });
        check_stream_registry(ids);
        for (char c : over_cap) truncated = truncated || c;

        MseReport report = decompose_mse(values, reference, names);
        double mean_cost = 0.0;
        for (double c : costs) mean_cost += c;
        mean_cost /= double(rep.replicates);
        append_mse_rows(table, report, double(s_count), mean_cost);
        for (const auto& r : report.rows) {
            mse_series[r.component].x.push_back(double(s_count));
            mse_series[r.component].y.push_back(r.rel_mse);
            bias_series[r.component].x.push_back(double(s_count));
            bias_series[r.component].y.push_back(r.rel_bias2);
            var_series[r.component].x.push_back(double(s_count));
            var_series[r.component].y.push_back(r.rel_variance);
        }
    }
    ctx.result.truncated = ctx.result.truncated || truncated;
    ctx.emit_table(table, "mse");
    for (const auto& [component, mse] : mse_series) {
        std::vector<PlotSeries> series;
        series.push_back({"rel MSE", mse.x, mse.y});
        series.push_back({"rel bias^2", bias_series[component].x, bias_series[component].y});
        series.push_back({"rel variance", var_series[component].x, var_series[component].y});
        ctx.emit_plot("mse_" + component, "Relative MSE vs S (" + component + ")", "S",
                      "relative error", series, true, true);
    }
}

// Monte Carlo self-reference: mean of many single-term estimates, with its
// standard error recorded in the manifest.
template <class Model>
Eigen::VectorXd self_reference(Ctx& ctx, const Model& model, const typename Model::Outer& z0,
                               const Eigen::VectorXd& xi, const LevelDistribution& dist) {
    const auto& rep = ctx.cfg.replication;
    long long n = rep.reference_draws;
    if (n == 0) {
        int s_max = 1;
        for (int s : ctx.cfg.estimator.s_grid) s_max = std::max(s_max, s);
        n = 16LL * rep.replicates * s_max;
    }
    const int k = model.param_dim();
    RngStream root(ctx.seed);
    RngStream ref_rng = root.child("self-reference");
    std::vector<RngStream> streams = fan_out(ref_rng, std::size_t(n));
    Eigen::MatrixXd values(n, k);
    for_each_replicate(std::size_t(n), ctx.workers, [&](std::size_t i) {
        RngStream stream = streams[i];
        RngStream outer_rng = stream.child("outer");
        typename Model::Outer z = model.outer_step(z0, outer_rng);
        RngStream est_rng = stream.child("estimate");
        values.row(Eigen::Index(i)) =
            estimate_H(model, z, xi, dist, ctx.cfg.estimator.weighting, est_rng).value;
    });
    Eigen::VectorXd mean = values.colwise().mean();
    Eigen::VectorXd se(k);
    for (int j = 0; j < k; ++j) {
        double var = (values.col(j).array() - mean(j)).square().sum() / double(n - 1);
        se(j) = std::sqrt(var / double(n));
    }
    ctx.manifest["reference"] = {{"kind", "self"},
                                 {"draws", n},
                                 {"value", std::vector<double>(mean.data(), mean.data() + k)},
                                 {"se", std::vector<double>(se.data(), se.data() + k)}};
    return mean;
}

void run_rel_mse(Ctx& ctx) {
    if (ctx.cfg.model == ModelKind::Toy) {
        toy::DiscreteCso inst = make_toy(ctx.cfg.toy);
        const Eigen::VectorXd xi = Eigen::VectorXd::Constant(1, ctx.cfg.toy.xi);
        const LevelDistribution dist = make_dist(ctx.cfg.estimator);
        double ref;
        std::string kind;
        if (!dist.unbounded() && dist.max_level() <= 2) {
            ref = toy::exhaustive_estimator_mean(inst, 0, ctx.cfg.toy.xi, dist,
                                                 ctx.cfg.estimator.weighting);
            kind = "exhaustive";
        } else {
            ref = toy::exact_H(inst, 0, ctx.cfg.toy.xi);
            kind = "exact";
        }
        ctx.manifest["reference"] = {{"kind", kind}, {"value", {ref}}};
        rel_mse_core(ctx, inst, 0, xi, Eigen::VectorXd::Constant(1, ref), {"xi"});
        return;
    }
    if (ctx.cfg.model == ModelKind::Ssm) {
        ssm::SsmCsoModel model = make_ssm(ctx.cfg.ssm);
        const Eigen::VectorXd xi = model.data.params_true.as_vector();
        bool near_gaussian = true;
        for (const auto& m : model.model_set)
            near_gaussian = near_gaussian && (m.gaussian() || m.dof >= 100000);
        Eigen::VectorXd reference;
        if (near_gaussian) {
            reference = ssm::kalman_score(model.data, model.data.params_true);
            ctx.manifest["reference"] = {
                {"kind", "kalman"},
                {"value", std::vector<double>(reference.data(), reference.data() + 3)}};
        } else {
            reference =
                self_reference(ctx, model, model.model_set[0], xi, make_dist(ctx.cfg.estimator));
        }
        rel_mse_core(ctx, model, model.model_set[0], xi, reference, {"sigma", "mu", "Sigma"});
        return;
    }
    throw std::runtime_error("rel-mse-vs-S: msv model has no score reference");
}

// ------------------------------------------------------------ msa-convergence

template <class Model>
void msa_core(Ctx& ctx, const Model& model, const typename Model::Outer& z0,
              const Eigen::VectorXd& xi0, const StepSchedule& schedule,
              const Reparameterization& reparam, const Eigen::VectorXd& truth,
              const std::vector<std::string>& names) {
    const auto& rep = ctx.cfg.replication;
    const auto& msa = ctx.cfg.msa;
    const LevelDistribution dist = make_dist(ctx.cfg.estimator);

    MsaOptions opt;
    opt.iterations = msa.iterations;
    opt.s_count = msa.s_count;
    opt.outer_steps_per_update = msa.outer_steps_per_update;
    opt.mode = ctx.cfg.estimator.weighting;
    opt.clip = msa.clip;
    opt.minimize = msa.minimize;

    RngStream root(ctx.seed);
    RngStream runs_rng = root.child("msa-runs");
    std::vector<RngStream> streams = fan_out(runs_rng, std::size_t(rep.runs));
    std::vector<MsaTrajectory> runs(std::size_t(rep.runs));
    for_each_replicate(std::size_t(rep.runs), ctx.workers, [&](std::size_t c) {
        RngStream stream = streams[c];
        runs[c] = msa_run(model, xi0, z0, schedule, reparam, dist, opt, stream);
    });

    std::vector<bool> absolute;
    Eigen::MatrixXd rel_mse = estimate_parameter_mse(runs, truth, &absolute);
    const int k = int(truth.size());

    CsvTable table;
    table.header = {"iteration", "component", "rel_mse", "mean_xi", "absolute"};
    std::map<std::string, PlotSeries> series;
    std::vector<int> grid;
    for (int n = 0; n <= msa.iterations; n += msa.record_every) grid.push_back(n);
    if (grid.back() != msa.iterations) grid.push_back(msa.iterations);
    for (int n : grid) {
        for (int j = 0; j < k; ++j) {
            double mean_xi = 0.0;
            for (const auto& run : runs) mean_xi += run.steps[std::size_t(n)].xi(j);
            mean_xi /= double(rep.runs);
            table.rows.push_back({std::to_string(n), names[std::size_t(j)],
                                  format_double(rel_mse(n, j)), format_double(mean_xi),
                                  absolute[std::size_t(j)] ? "1" : "0"});
            if (n > 0) {
                series[names[std::size_t(j)]].x.push_back(double(n));
                series[names[std::size_t(j)]].y.push_back(rel_mse(n, j));
            }
        }
    }
    ctx.emit_table(table, "convergence");
    std::vector<PlotSeries> plot_series;
    for (auto& [name, s] : series) plot_series.push_back({name, s.x, s.y});
    ctx.emit_plot("convergence", "Relative MSE vs MSA iteration", "iteration", "relative MSE",
                  plot_series, true, true);
}

void run_msa_convergence(Ctx& ctx) {
    if (ctx.cfg.model == ModelKind::Ssm) {
        ssm::SsmCsoModel model = make_ssm(ctx.cfg.ssm);
        const auto& msa = ctx.cfg.msa;
        Eigen::VectorXd xi0(3);
        xi0 << msa.init_sigma, msa.init_mu, msa.init_Sigma;
        StepSchedule schedule;
        schedule.gamma0_per_block = {{"sigma", msa.gamma0_sigma}, {"muSigma", msa.gamma0_mu_Sigma}};
        schedule.offset = msa.offset;
        schedule.exponent = msa.exponent;
        schedule.component_block = {"sigma", "muSigma", "muSigma"};
        Reparameterization reparam;
        reparam.transforms = {Reparameterization::Transform::Log,
                              Reparameterization::Transform::Identity,
                              Reparameterization::Transform::Log};
        msa_core(ctx, model, model.model_set[0], xi0, schedule, reparam,
                 model.data.params_true.as_vector(), {"sigma", "mu", "Sigma"});
        return;
    }
    // toy model: F(xi) = E[(xi gbar)^2] is minimized at 0
    toy::DiscreteCso inst = make_toy(ctx.cfg.toy);
    const auto& msa = ctx.cfg.msa;
    StepSchedule schedule;
    schedule.gamma0_per_block = {{"all", msa.gamma0}};
    schedule.offset = msa.offset;
    schedule.exponent = msa.exponent;
    schedule.component_block = {"all"};
    msa_core(ctx, inst, 0, Eigen::VectorXd::Constant(1, ctx.cfg.toy.xi), schedule,
             Reparameterization::identity(1), Eigen::VectorXd::Zero(1), {"xi"});
}

// ----------------------------------------------------- msv shared optimization

struct MsvRun {
    MsaTrajectory trajectory;
    std::vector<int> grid;             // recorded iterations
    std::vector<double> objective;     // F-bar estimate per recorded iteration
    std::vector<double> max_weight;
};

msv::PortfolioConfig make_portfolio_cfg(const MsvBlock& m) {
    msv::PortfolioConfig cfg;
    cfg.zeta = m.zeta;
    cfg.horizon = m.horizon_future;
    cfg.pred_batch = m.pred_batch;
    cfg.independent_batches = m.independent_batches;
    return cfg;
}

template <class Model>
MsvRun msv_optimize(Ctx& ctx, const Model& model, const typename Model::Outer& z0,
                    RngStream& rng) {
    const auto& msa = ctx.cfg.msa;
    const LevelDistribution dist = make_dist(ctx.cfg.estimator);
    const int p = model.param_dim();

    MsaOptions opt;
    opt.iterations = msa.iterations;
    opt.s_count = msa.s_count;
    opt.outer_steps_per_update = msa.outer_steps_per_update;
    opt.mode = ctx.cfg.estimator.weighting;
    opt.clip = msa.clip;
    opt.minimize = msa.minimize;

    StepSchedule schedule;
    schedule.gamma0_per_block = {{"logit", msa.gamma0}};
    schedule.offset = msa.offset;
    schedule.exponent = msa.exponent;
    schedule.component_block.assign(std::size_t(p), "logit");

    MsvRun run;
    RngStream opt_rng = rng.child("optimize");
    run.trajectory = msa_run(model, Eigen::VectorXd::Zero(p), z0, schedule,
                             Reparameterization::identity(p), dist, opt, opt_rng);

    for (int n = 0; n <= msa.iterations; n += msa.record_every) run.grid.push_back(n);
    if (run.grid.back() != msa.iterations) run.grid.push_back(msa.iterations);

    // An F-bar(xi_n) trace: fresh outer/inner draws, a couple of kernel steps
    // toward the inner invariant law, averaged payoffs.
    RngStream eval_root = rng.child("objective");
    std::vector<RngStream> eval_streams = fan_out(eval_root, run.grid.size());
    run.objective.resize(run.grid.size());
    run.max_weight.resize(run.grid.size());
    for_each_replicate(run.grid.size(), ctx.workers, [&](std::size_t i) {
        RngStream stream = eval_streams[i];
        const Eigen::VectorXd& xi = run.trajectory.steps[std::size_t(run.grid[i])].xi;
        double acc = 0.0;
        for (int b = 0; b < msa.objective_batch; ++b) {
            RngStream draw = stream.child(std::uint64_t(b));
            RngStream outer_rng = draw.child("outer");
            typename Model::Outer z = model.outer_step(z0, outer_rng);
            RngStream inner_rng = draw.child("inner");
            typename Model::Inner x = model.sample_initial(z, xi, inner_rng);
            x = model.inner_step(z, x, xi, inner_rng);
            x = model.inner_step(z, x, xi, inner_rng);
            acc += model.eval_g(z, x, xi)(0);
        }
        run.objective[i] = acc / double(msa.objective_batch);
        run.max_weight[i] = msv::softmax_weights(xi).maxCoeff();
    });
    return run;
}

struct MsvSetup {
    msv::MsvInstance instance;
    Eigen::MatrixXd y;  // log(1 + r)
};

MsvSetup make_msv(const MsvBlock& m) {
    MsvSetup setup;
    setup.instance = msv::make_synthetic_instance(m.assets, m.factors, m.history,
                                                  m.horizon_future, m.instance_seed);
    setup.y = setup.instance.returns.array().log1p();
    return setup;
}

MsvRun msv_optimize_dispatch(Ctx& ctx, const MsvSetup& setup, RngStream& rng) {
    if (ctx.cfg.msv.framework == 1) {
        msv::MsvCsoF1 model;
        model.y = setup.y;
        model.n_factors = ctx.cfg.msv.factors;
        model.cfg = make_portfolio_cfg(ctx.cfg.msv);
        RngStream init_rng = rng.child("z0");
        msv::MsvCsoF1::Outer z0 = model.make_initial_outer(init_rng);
        return msv_optimize(ctx, model, z0, rng);
    }
    msv::MsvCsoF2 model;
    model.y = setup.y;
    model.n_assets = ctx.cfg.msv.assets;
    model.n_factors = ctx.cfg.msv.factors;
    model.cfg = make_portfolio_cfg(ctx.cfg.msv);
    RngStream init_rng = rng.child("z0");
    msv::MsvCsoF2::Outer z0 = msv::sample_theta_prior(model.n_factors, init_rng);
    return msv_optimize(ctx, model, z0, rng);
}

void run_objective_trace(Ctx& ctx) {
    MsvSetup setup = make_msv(ctx.cfg.msv);
    RngStream root(ctx.seed);
    RngStream trace_rng = root.child("objective-trace");
    MsvRun run = msv_optimize_dispatch(ctx, setup, trace_rng);

    CsvTable table;
    table.header = {"iteration", "objective", "max_weight"};
    PlotSeries obj{"F-bar", {}, {}};
    for (std::size_t i = 0; i < run.grid.size(); ++i) {
        table.rows.push_back({std::to_string(run.grid[i]), format_double(run.objective[i]),
                              format_double(run.max_weight[i])});
        obj.x.push_back(double(run.grid[i]));
        obj.y.push_back(run.objective[i]);
    }
    ctx.emit_table(table, "trace");
    ctx.emit_plot("trace", "Objective estimate vs MSA iteration", "iteration", "F-bar", {obj},
                  false, false);
}

void run_backtest(Ctx& ctx) {
    MsvSetup setup = make_msv(ctx.cfg.msv);
    RngStream root(ctx.seed);
    RngStream bt_rng = root.child("backtest");
    MsvRun run = msv_optimize_dispatch(ctx, setup, bt_rng);

    const Eigen::VectorXd w_opt =
        msv::softmax_weights(run.trajectory.steps.back().xi);
    const int p = int(setup.instance.returns.rows());
    const Eigen::VectorXd w_eq = Eigen::VectorXd::Constant(p, 1.0 / double(p));

    auto portfolio_returns = [&](const Eigen::VectorXd& w) {
        std::vector<double> out;
        for (Eigen::Index t = 0; t < setup.instance.returns.cols(); ++t)
            out.push_back(w.dot(setup.instance.returns.col(t)));
        return out;
    };
    const std::vector<double> r_opt = portfolio_returns(w_opt);
    const std::vector<double> r_eq = portfolio_returns(w_eq);

    CsvTable metrics;
    metrics.header = {"strategy", "final_wealth", "pct_gain", "pct_loss", "mdd",
                      "pct_wt",   "ann_ret",      "ann_vol",  "sharpe",   "sharpe_defined"};
    auto metric_row = [&](const std::string& name, const std::vector<double>& r) {
        msv::BacktestMetrics m = msv::backtest_metrics(r);
        metrics.rows.push_back({name, format_double(m.final_wealth), format_double(m.pct_gain),
                                format_double(m.pct_loss), format_double(m.mdd),
                                format_double(m.pct_wt), format_double(m.ann_ret),
                                format_double(m.ann_vol), format_double(m.sharpe),
                                m.sharpe_defined ? "1" : "0"});
    };
    metric_row("optimized", r_opt);
    metric_row("equal-weight", r_eq);
    ctx.emit_table(metrics, "metrics");

    CsvTable wealth;
    wealth.header = {"t", "wealth_optimized", "wealth_equal"};
    PlotSeries s_opt{"optimized", {}, {}}, s_eq{"equal-weight", {}, {}};
    double w1 = 1.0, w2 = 1.0;
    for (std::size_t t = 0; t < r_opt.size(); ++t) {
        w1 *= 1.0 + r_opt[t];
        w2 *= 1.0 + r_eq[t];
        wealth.rows.push_back({std::to_string(t + 1), format_double(w1), format_double(w2)});
        s_opt.x.push_back(double(t + 1));
        s_opt.y.push_back(w1);
        s_eq.x.push_back(double(t + 1));
        s_eq.y.push_back(w2);
    }
    ctx.emit_table(wealth, "wealth");
    ctx.emit_plot("wealth", "Synthetic backtest wealth", "period", "wealth", {s_opt, s_eq}, false,
                  false);

    ctx.manifest["final_weights"] =
        std::vector<double>(w_opt.data(), w_opt.data() + w_opt.size());
}

// ----------------------------------------------------------------- level-decay

template <class Model>
void level_decay_core(Ctx& ctx, const Model& model, const typename Model::Outer& z0,
                      const Eigen::VectorXd& xi) {
    const auto& est = ctx.cfg.estimator;
    const auto& rep = ctx.cfg.replication;
    const int l_max = est.dist == DistKind::PointMass ? est.level : est.l_max;
    if (l_max < 3) throw std::runtime_error("level-decay: needs l_max >= 3");
    const int k = model.param_dim();

    RngStream root(ctx.seed);
    RngStream decay_rng = root.child("level-decay");
    std::vector<RngStream> streams = fan_out(decay_rng, std::size_t(rep.replicates));
    // terms[r] holds the coupled composite term at every level 1..l_max
    std::vector<Eigen::MatrixXd> terms(std::size_t(rep.replicates));
    for_each_replicate(std::size_t(rep.replicates), ctx.workers, [&](std::size_t r) {
        RngStream stream = streams[r];
        RngStream outer_rng = stream.child("outer");
        typename Model::Outer z = model.outer_step(z0, outer_rng);
        std::vector<SegmentAverage> segments;
        for (int p = 1; p <= l_max; ++p) {
            std::int64_t transitions = level_samples(p) - level_samples(p - 1);
            if (p == 1) transitions = level_samples(1);
            RngStream seg_rng = stream.child(std::uint64_t(p));
            segments.push_back(run_mc_segment(model, z, xi, transitions, seg_rng));
        }
        Eigen::MatrixXd t(l_max, k);
        std::vector<SegmentAverage> prefix;
        for (int l = 1; l <= l_max; ++l) {
            prefix.push_back(segments[std::size_t(l - 1)]);
            t.row(l - 1) = assemble_term(model, z, combine_segments(prefix, est.weighting));
        }
        terms[r] = std::move(t);
    });

    CsvTable table;
    table.header = {"l", "gap_next_rms", "gap_next2_rms"};
    PlotSeries g1{"level gap (l, l+1)", {}, {}}, g2{"level gap (l, l+2)", {}, {}};
    for (int l = 1; l <= l_max - 1; ++l) {
        double s1 = 0.0, s2 = 0.0;
        for (const auto& t : terms) {
            s1 += (t.row(l) - t.row(l - 1)).squaredNorm();
            if (l + 1 < l_max) s2 += (t.row(l + 1) - t.row(l - 1)).squaredNorm();
        }
        const double gap1 = std::sqrt(s1 / double(rep.replicates));
        std::string gap2_text;
        if (l + 1 < l_max) {
            const double gap2 = std::sqrt(s2 / double(rep.replicates));
            gap2_text = format_double(gap2);
            g2.x.push_back(double(l));
            g2.y.push_back(gap2);
        }
        table.rows.push_back({std::to_string(l), format_double(gap1), gap2_text});
        g1.x.push_back(double(l));
        g1.y.push_back(gap1);
    }
    ctx.emit_table(table, "decay");
    ctx.emit_plot("decay", "Composite-term L2 gaps vs level", "l", "L2 gap", {g1, g2}, false, true);
}

void run_level_decay(Ctx& ctx) {
    if (ctx.cfg.model == ModelKind::Toy) {
        toy::DiscreteCso inst = make_toy(ctx.cfg.toy);
        level_decay_core(ctx, inst, 0, Eigen::VectorXd::Constant(1, ctx.cfg.toy.xi));
        return;
    }
    if (ctx.cfg.model == ModelKind::Ssm) {
        ssm::SsmCsoModel model = make_ssm(ctx.cfg.ssm);
        level_decay_core(ctx, model, model.model_set[0], model.data.params_true.as_vector());
        return;
    }
    MsvSetup setup = make_msv(ctx.cfg.msv);
    msv::MsvCsoF2 model;
    model.y = setup.y;
    model.n_assets = ctx.cfg.msv.assets;
    model.n_factors = ctx.cfg.msv.factors;
    model.cfg = make_portfolio_cfg(ctx.cfg.msv);
    RngStream root(ctx.seed);
    RngStream z_rng = root.child("level-decay-z0");
    msv::MsvCsoF2::Outer z0 = msv::sample_theta_prior(model.n_factors, z_rng);
    level_decay_core(ctx, model, z0, Eigen::VectorXd::Zero(model.param_dim()));
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
    Ctx ctx{cfg,
            opt.has_seed ? opt.seed : cfg.replication.seed,
            fs::path(opt.out_dir.empty() ? cfg.output.directory : opt.out_dir),
            (opt.format.empty() ? cfg.output.formats : opt.format) == "csv+plot",
            std::max(1, opt.workers),
            json::object(),
            RunResult{},
            now_seconds()};

    ctx.manifest["experiment"] = to_string(cfg.kind);
    ctx.manifest["config_hash"] = config_hash(cfg.source_text);
    ctx.manifest["master_seed"] = ctx.seed;
    ctx.manifest["workers"] = ctx.workers;

    // writability is checked before any computation
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    {
        const fs::path probe = ctx.out_dir / ".write-probe";
        std::ofstream test(probe);
        if (!test) {
            ctx.result.ok = false;
            ctx.result.error = "output directory is not writable: " + ctx.out_dir.string();
            return ctx.result;
        }
        test.close();
        fs::remove(probe, ec);
    }

    try {
        switch (cfg.kind) {
            case ExperimentKind::RelMseVsS: run_rel_mse(ctx); break;
            case ExperimentKind::MsaConvergence: run_msa_convergence(ctx); break;
            case ExperimentKind::ObjectiveTrace: run_objective_trace(ctx); break;
            case ExperimentKind::LevelDecay: run_level_decay(ctx); break;
            case ExperimentKind::BacktestSynthetic: run_backtest(ctx); break;
        }
    } catch (const std::exception& e) {
        ctx.result.ok = false;
        ctx.result.error = e.what();
        ctx.manifest["failure"] = e.what();
    }

    ctx.manifest["truncated"] = ctx.result.truncated;
    ctx.manifest["outputs"] = ctx.result.outputs;
    ctx.manifest["runtime_seconds"] = now_seconds() - ctx.t0;
    const std::string manifest_path = ctx.file("manifest", "json");
    std::ofstream out(manifest_path);
    out << ctx.manifest.dump(2) << "\n";
    ctx.result.outputs.push_back(manifest_path);
    return ctx.result;
}

}  // namespace ucso::harness
