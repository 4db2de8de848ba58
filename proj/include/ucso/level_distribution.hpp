#pragma once

#include <cstdint>
#include <vector>

#include "ucso/rng.hpp"

namespace ucso {

// Sample budget at level l.
inline std::int64_t level_samples(int l) { return std::int64_t(1) << l; }  // N_l = 2^l, N_0 = 0

// Probability law over multilevel truncation levels, support starting at l = 1.
//
//   geometric(beta):        pmf(l) proportional to 2^{-beta*l}, unbounded support,
//                           sampled exactly by inverse CDF (no truncation).
//   truncated_log(q,L_max): pmf(l) proportional to (l+q) log^2(l+q) / N_l
//                           on {1, ..., L_max}.
class LevelDistribution {
public:
    static LevelDistribution geometric(double beta);
    static LevelDistribution truncated_log(int q, int l_max);
    // Point mass, used in tests and for degenerate configurations.
    static LevelDistribution point_mass(int l);

    double pmf(int l) const;
    int sample(RngStream& rng) const;

    // 0 means unbounded (geometric).
    int max_level() const { return l_max_; }
    bool unbounded() const { return l_max_ == 0; }

private:
    LevelDistribution() = default;

    enum class Kind { Geometric, TruncatedLog, PointMass };
    Kind kind_ = Kind::Geometric;
    double beta_ = 1.0;
    int q_ = 1;
    int l_max_ = 0;
    int point_ = 1;
    std::vector<double> pmf_;  // finite-support laws: pmf_[l-1]
    std::vector<double> cdf_;
};

}  // namespace ucso
