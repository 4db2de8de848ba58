#include "ucso/toy.hpp"

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>

namespace ucso::toy {

void DiscreteCso::validate() const {
    for (int r = 0; r < 2; ++r) {
        if (std::abs(kernel.row(r).sum() - 1.0) > 1e-12)
            throw std::invalid_argument("toy kernel rows must sum to 1");
        for (int c = 0; c < 2; ++c)
            if (!(kernel(r, c) > 0.0))
                throw std::invalid_argument("toy kernel entries must be strictly positive");
    }
    if (std::abs(initial.sum() - 1.0) > 1e-12 || !(initial(0) > 0.0) || !(initial(1) > 0.0))
        throw std::invalid_argument("toy initial law must be a strictly positive probability vector");
    if (n_outer < 1 || g_table.size() != std::size_t(n_outer))
        throw std::invalid_argument("toy g table must cover every outer state");
}

double DiscreteCso::stationary_one() const {
    return kernel(0, 1) / (kernel(0, 1) + kernel(1, 0));
}

double exact_H(const DiscreteCso& instance, int z, double xi) {
    const double p1 = instance.stationary_one();
    const auto& g = instance.g_table[std::size_t(z)];
    const double mean_table = (1.0 - p1) * g[0] + p1 * g[1];
    // E[grad_g | z] * grad_f(E[g | z]) with grad_f(u) = 2u
    return mean_table * 2.0 * (xi * mean_table);
}

namespace {

struct Atom {
    double avg;   // path average of the g table values
    double prob;  // exact path probability
};

// All inner-chain paths with `transitions` kernel steps for outer state z.
std::vector<Atom> enumerate_segment(const DiscreteCso& m, int z, std::int64_t transitions) {
    const auto& g = m.g_table[std::size_t(z)];
    std::vector<Atom> atoms;
    const int steps = int(transitions);
    std::function<void(int, int, double, double)> walk = [&](int depth, int x, double prob,
                                                             double sum) {
        if (depth == steps) {
            atoms.push_back({sum / double(steps + 1), prob});
            return;
        }
        for (int nx = 0; nx < 2; ++nx)
            walk(depth + 1, nx, prob * m.kernel(x, nx), sum + g[std::size_t(nx)]);
    };
    for (int x0 = 0; x0 < 2; ++x0)
        walk(0, x0, m.initial(x0), g[std::size_t(x0)]);
    return atoms;
}

std::int64_t segment_transitions(int p) {
    return p == 1 ? level_samples(1) : level_samples(p) - level_samples(p - 1);
}

// Combined-term value from per-segment path averages.
double term_value(std::span<const double> seg_avgs, WeightingMode mode, double xi) {
    const int l = int(seg_avgs.size());
    double total = 0.0;
    for (int p = 1; p <= l; ++p) total += double(segment_transitions(p) + 1);
    double combined = 0.0;
    for (int p = 1; p <= l; ++p) {
        const double count = double(segment_transitions(p) + 1);
        const double w = mode == WeightingMode::Normalized ? count / total
                                                           : count / double(level_samples(l));
        combined += w * seg_avgs[std::size_t(p - 1)];
    }
    return combined * 2.0 * (xi * combined);
}

// Enumerates the joint law of segments 1..l and accumulates f(values, prob).
void for_each_joint_path(const DiscreteCso& m, int z, int l,
                         const std::function<void(std::span<const double>, double)>& fn) {
    std::vector<std::vector<Atom>> per_seg;
    per_seg.reserve(std::size_t(l));
    for (int p = 1; p <= l; ++p) per_seg.push_back(enumerate_segment(m, z, segment_transitions(p)));
    std::vector<double> avgs(static_cast<std::size_t>(l));
    std::function<void(int, double)> walk = [&](int p, double prob) {
        if (p == l) {
            fn(avgs, prob);
            return;
        }
        for (const Atom& a : per_seg[std::size_t(p)]) {
            avgs[std::size_t(p)] = a.avg;
            walk(p + 1, prob * a.prob);
        }
    };
    walk(0, 1.0);
}

double exhaustive_moment(const DiscreteCso& instance, int z, double xi,
                         const LevelDistribution& dist, WeightingMode mode, int power) {
    if (dist.unbounded()) throw std::invalid_argument("exhaustive enumeration needs a truncated law");
    double total = 0.0;
    for (int l = 1; l <= dist.max_level(); ++l) {
        double p_l;
        try {
            p_l = dist.pmf(l);
        } catch (const std::domain_error&) {
            continue;
        }
        if (p_l <= 0.0) continue;
        for_each_joint_path(instance, z, l, [&](std::span<const double> avgs, double prob) {
            double value;
            if (l == 1) {
                value = term_value(avgs, mode, xi) / p_l;
            } else {
                const double fine = term_value(avgs, mode, xi);
                const double coarse = term_value(avgs.first(std::size_t(l - 1)), mode, xi);
                value = (fine - coarse) / p_l;
            }
            total += p_l * prob * std::pow(value, power);
        });
    }
    return total;
}

}  // namespace

double exhaustive_term_mean(const DiscreteCso& instance, int z, double xi, int level,
                            WeightingMode mode) {
    double total = 0.0;
    for_each_joint_path(instance, z, level, [&](std::span<const double> avgs, double prob) {
        total += prob * term_value(avgs, mode, xi);
    });
    return total;
}

double exhaustive_estimator_mean(const DiscreteCso& instance, int z, double xi,
                                 const LevelDistribution& dist, WeightingMode mode) {
    return exhaustive_moment(instance, z, xi, dist, mode, 1);
}

double exhaustive_estimator_second_moment(const DiscreteCso& instance, int z, double xi,
                                          const LevelDistribution& dist, WeightingMode mode) {
    return exhaustive_moment(instance, z, xi, dist, mode, 2);
}

}  // namespace ucso::toy
