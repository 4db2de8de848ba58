#pragma once

#include "ucso/ssm/model.hpp"

namespace ucso::ssm {

struct PgasConfig {
    int n_particles = 10;

    void validate() const {
        if (n_particles < 2) throw std::invalid_argument("cpf: need at least 2 particles");
    }
};

// One sweep of the conditional particle filter with backward sampling:
// bootstrap proposals from the transition, multinomial resampling every step,
// the reference trajectory frozen in the last particle slot, then a full
// backward-sampling pass.  Leaves pi_theta(x_{1:T} | y_{1:T}, m) invariant.
LatentPath cpf_bs_kernel(const LatentPath& ref, const SsmData& data, ModelIndex m,
                         const SsmParams& params, const PgasConfig& cfg, RngStream& rng);

}  // namespace ucso::ssm
