#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ucso/level_distribution.hpp"
#include "ucso/rng.hpp"

namespace ucso {

// A CSO model supplies, for outer state z, inner state x and parameter xi:
//
//   using Outer = ...; using Inner = ...;
//   int param_dim() const;                                   // k
//   int output_dim() const;                                  // d
//   Eigen::VectorXd eval_g(z, x, xi) const;                  // d-vector
//   Eigen::MatrixXd eval_grad_g(z, x, xi) const;             // d x k Jacobian in xi
//   Eigen::VectorXd eval_grad_f(z, u) const;                 // d-vector, u in R^d
//   Inner sample_initial(z, xi, RngStream&) const;           // eta(.|z)
//   Inner inner_step(z, x, xi, RngStream&) const;            // one M_z transition
//   Outer outer_step(z, RngStream&) const;                   // one K transition
//
// All methods must be pure given the RNG stream and safe for concurrent calls
// on distinct streams.

enum class WeightingMode {
    Normalized,    // weights proportional to actual point counts, sum to 1
    PaperLiteral,  // weight_p = (N_p - N_{p-1} + 1) / N_l, sums to (N_l + l)/N_l
};

struct SegmentAverage {
    Eigen::VectorXd mean_g;       // d
    Eigen::MatrixXd mean_grad_g;  // d x k
    std::int64_t sample_count = 0;
};

struct CombinedAverage {
    Eigen::VectorXd combined_g;
    Eigen::MatrixXd combined_grad_g;
    WeightingMode mode = WeightingMode::Normalized;
    int level = 0;
};

struct GradientEstimate {
    Eigen::VectorXd value;  // k
    int level = 0;
    std::int64_t inner_samples_used = 0;  // kernel transitions + initial draws
    std::uint64_t rng_stream_id = 0;
};

// Averages g and grad_g along one inner chain: the initial draw plus
// n_transitions kernel steps, n_transitions + 1 points in total.
template <class Model>
SegmentAverage run_mc_segment(const Model& model, const typename Model::Outer& z,
                              const Eigen::VectorXd& xi, std::int64_t n_transitions,
                              RngStream& rng) {
    if (n_transitions < 1) throw std::invalid_argument("run_mc_segment: n_transitions < 1");
    typename Model::Inner x = model.sample_initial(z, xi, rng);
    SegmentAverage seg;
    seg.mean_g = model.eval_g(z, x, xi);
    seg.mean_grad_g = model.eval_grad_g(z, x, xi);
    for (std::int64_t n = 0; n < n_transitions; ++n) {
        x = model.inner_step(z, x, xi, rng);
        seg.mean_g += model.eval_g(z, x, xi);
        seg.mean_grad_g += model.eval_grad_g(z, x, xi);
    }
    seg.sample_count = n_transitions + 1;
    seg.mean_g /= double(seg.sample_count);
    seg.mean_grad_g /= double(seg.sample_count);
    return seg;
}

// Weighted combination of the first `segments.size()` chain-segment averages.
// Segment p (1-based) must hold N_p - N_{p-1} + 1 points.
inline CombinedAverage combine_segments(const std::vector<SegmentAverage>& segments,
                                        WeightingMode mode) {
    if (segments.empty()) throw std::invalid_argument("combine_segments: no segments");
    const int l = int(segments.size());
    double total = 0.0;
    for (int p = 1; p <= l; ++p) {
        std::int64_t expected = level_samples(p) - level_samples(p - 1) + 1;
        if (p == 1) expected = level_samples(1) + 1;  // N_0 = 0
        if (segments[p - 1].sample_count != expected)
            throw std::invalid_argument("combine_segments: segment sample count does not match N_l schedule");
        total += double(segments[p - 1].sample_count);
    }
    CombinedAverage out;
    out.mode = mode;
    out.level = l;
    out.combined_g = Eigen::VectorXd::Zero(segments[0].mean_g.size());
    out.combined_grad_g =
        Eigen::MatrixXd::Zero(segments[0].mean_grad_g.rows(), segments[0].mean_grad_g.cols());
    const double n_l = double(level_samples(l));
    for (int p = 1; p <= l; ++p) {
        const auto& seg = segments[p - 1];
        double w = mode == WeightingMode::Normalized ? double(seg.sample_count) / total
                                                     : double(seg.sample_count) / n_l;
        out.combined_g += w * seg.mean_g;
        out.combined_grad_g += w * seg.mean_grad_g;
    }
    return out;
}

// combined_grad_g^T * grad_f(z, combined_g), a k-vector.
template <class Model>
Eigen::VectorXd assemble_term(const Model& model, const typename Model::Outer& z,
                              const CombinedAverage& combined) {
    Eigen::VectorXd gf = model.eval_grad_f(z, combined.combined_g);
    if (!gf.allFinite()) throw std::runtime_error("assemble_term: non-finite grad_f output");
    return combined.combined_grad_g.transpose() * gf;
}

// Single-term randomized unbiased estimator of H(z, xi).  Samples a level L,
// runs L independent chain segments, and returns the coupled difference of the
// level-L and level-(L-1) combined terms scaled by 1 / P_L(L); at L = 1 the
// plain N_1-sample term is returned.
template <class Model>
GradientEstimate estimate_H(const Model& model, const typename Model::Outer& z,
                            const Eigen::VectorXd& xi, const LevelDistribution& dist,
                            WeightingMode mode, RngStream& rng) {
    RngStream level_rng = rng.child("level");
    const int level = dist.sample(level_rng);
    const double inv_p = 1.0 / dist.pmf(level);

    std::vector<SegmentAverage> segments;
    segments.reserve(level);
    std::int64_t cost = 0;
    for (int p = 1; p <= level; ++p) {
        std::int64_t transitions = level_samples(p) - level_samples(p - 1);
        if (p == 1) transitions = level_samples(1);
        RngStream seg_rng = rng.child(std::uint64_t(p));
        segments.push_back(run_mc_segment(model, z, xi, transitions, seg_rng));
        cost += transitions + 1;
    }

    GradientEstimate est;
    est.level = level;
    est.inner_samples_used = cost;
    est.rng_stream_id = rng.id();
    if (level == 1) {
        est.value = inv_p * assemble_term(model, z, combine_segments(segments, mode));
    } else {
        Eigen::VectorXd fine = assemble_term(model, z, combine_segments(segments, mode));
        segments.pop_back();
        Eigen::VectorXd coarse = assemble_term(model, z, combine_segments(segments, mode));
        est.value = inv_p * (fine - coarse);
    }
    return est;
}

// Arithmetic mean of S independent single-term estimators, one substream each.
template <class Model>
Eigen::VectorXd estimate_H_averaged(const Model& model, const typename Model::Outer& z,
                                    const Eigen::VectorXd& xi, const LevelDistribution& dist,
                                    WeightingMode mode, int s_count, RngStream& rng) {
    if (s_count < 1) throw std::invalid_argument("estimate_H_averaged: S < 1");
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(model.param_dim());
    for (int s = 0; s < s_count; ++s) {
        RngStream sub = rng.child(std::uint64_t(s));
        acc += estimate_H(model, z, xi, dist, mode, sub).value;
    }
    return acc / double(s_count);
}

}  // namespace ucso
