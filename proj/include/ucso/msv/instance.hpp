#pragma once

#include <string>

#include "ucso/msv/params.hpp"

namespace ucso::msv {

// A self-contained synthetic problem: generating parameters plus the
// simulated return history.  Files round-trip bit-exactly.
struct MsvInstance {
    MsvParams params;
    Eigen::MatrixXd returns;  // p x T
    Eigen::Index horizon_future = 5;
    std::uint64_t seed = 0;

    int assets() const { return int(returns.rows()); }
    int factors() const { return params.theta.factors(); }
};

MsvInstance make_synthetic_instance(int p, int k, Eigen::Index history,
                                    Eigen::Index horizon_future, std::uint64_t seed);

void save_instance(const MsvInstance& inst, const std::string& path);
MsvInstance load_instance(const std::string& path);

}  // namespace ucso::msv
