#include "ucso/level_distribution.hpp"

#include <cmath>
#include <stdexcept>

namespace ucso {

LevelDistribution LevelDistribution::geometric(double beta) {
    if (!(beta > 0.0 && beta <= 1.0))
        throw std::invalid_argument("geometric level law requires beta in (0,1]");
    LevelDistribution d;
    d.kind_ = Kind::Geometric;
    d.beta_ = beta;
    d.l_max_ = 0;
    return d;
}

LevelDistribution LevelDistribution::truncated_log(int q, int l_max) {
    if (q < 1) throw std::invalid_argument("truncated-log level law requires q >= 1");
    if (l_max < 1) throw std::invalid_argument("truncated-log level law requires L_max >= 1");
    LevelDistribution d;
    d.kind_ = Kind::TruncatedLog;
    d.q_ = q;
    d.l_max_ = l_max;
    d.pmf_.resize(l_max);
    double total = 0.0;
    for (int l = 1; l <= l_max; ++l) {
        double lg = std::log(double(l + q));
        d.pmf_[l - 1] = double(l + q) * lg * lg / double(level_samples(l));
        total += d.pmf_[l - 1];
    }
    d.cdf_.resize(l_max);
    double acc = 0.0;
    for (int l = 1; l <= l_max; ++l) {
        d.pmf_[l - 1] /= total;
        acc += d.pmf_[l - 1];
        d.cdf_[l - 1] = acc;
    }
    d.cdf_[l_max - 1] = 1.0;
    return d;
}

LevelDistribution LevelDistribution::point_mass(int l) {
    if (l < 1) throw std::invalid_argument("point-mass level must be >= 1");
    LevelDistribution d;
    d.kind_ = Kind::PointMass;
    d.l_max_ = l;
    d.point_ = l;
    return d;
}

double LevelDistribution::pmf(int l) const {
    if (l < 1) throw std::domain_error("level must be >= 1");
    switch (kind_) {
        case Kind::Geometric:
            // closed-form normalization of the geometric series
            return (std::pow(2.0, beta_) - 1.0) * std::pow(2.0, -beta_ * l);
        case Kind::TruncatedLog:
            if (l > l_max_) throw std::domain_error("level above L_max");
            return pmf_[l - 1];
        case Kind::PointMass:
            if (l != point_) throw std::domain_error("level outside point-mass support");
            return 1.0;
    }
    throw std::logic_error("unreachable");
}

int LevelDistribution::sample(RngStream& rng) const {
    switch (kind_) {
        case Kind::Geometric: {
            // Inverse CDF: F(l) = 1 - 2^{-beta l}, exact for the unbounded tail.
            double u = rng.uniform();
            double raw = -std::log2(1.0 - u) / beta_;
            int l = int(std::ceil(raw));
            return l < 1 ? 1 : l;
        }
        case Kind::TruncatedLog: {
            double u = rng.uniform();
            for (int l = 1; l <= l_max_; ++l)
                if (u <= cdf_[l - 1]) return l;
            return l_max_;
        }
        case Kind::PointMass:
            (void)rng.uniform();  // keep stream usage uniform across kinds
            return point_;
    }
    throw std::logic_error("unreachable");
}

}  // namespace ucso
