#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace ucso {

// SplitMix64 step, used both as a stream-id mixer and to expand seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_name(std::string_view name) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// A named, reproducible random stream.  Streams form a tree: child(tag)
// derives a stream whose id depends on the parent id, the tag and a
// per-stream derivation counter, so repeated same-tag derivations (one per
// kernel transition, say) still yield distinct streams while the whole tree
// stays a pure function of the root seed.
class RngStream {
public:
    explicit RngStream(std::uint64_t id) : id_(id), engine_(expand_seed(id)) {}

    RngStream child(std::uint64_t tag) {
        std::uint64_t s = id_ ^ (0x9e3779b97f4a7c15ULL * (tag + 1)) ^
                          (0xda942042e4dd58b5ULL * ++derived_);
        return RngStream(splitmix64(s));
    }
    RngStream child(std::string_view name) { return child(hash_name(name)); }

    std::uint64_t id() const { return id_; }
    std::mt19937_64& engine() { return engine_; }

    double uniform() { return uniform_(engine_); }
    double normal() { return normal_(engine_); }
    double student_t(double dof) {
        std::student_t_distribution<double> d(dof);
        return d(engine_);
    }
    // index in [0, n)
    std::size_t uniform_index(std::size_t n) {
        std::uniform_int_distribution<std::size_t> d(0, n - 1);
        return d(engine_);
    }
    // Sample from unnormalized log-weights via log-sum-exp.
    std::size_t categorical_log(std::span<const double> logw);

private:
    static std::mt19937_64 expand_seed(std::uint64_t id) {
        std::uint64_t s = id;
        return std::mt19937_64(splitmix64(s));
    }

    std::uint64_t id_;
    std::uint64_t derived_ = 0;
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

inline std::size_t RngStream::categorical_log(std::span<const double> logw) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double w : logw) mx = std::max(mx, w);
    if (!std::isfinite(mx)) throw std::runtime_error("categorical_log: all weights are zero");
    double total = 0.0;
    std::vector<double> p(logw.size());
    for (std::size_t i = 0; i < logw.size(); ++i) {
        p[i] = std::exp(logw[i] - mx);
        total += p[i];
    }
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u <= acc) return i;
    }
    return p.size() - 1;
}

}  // namespace ucso
