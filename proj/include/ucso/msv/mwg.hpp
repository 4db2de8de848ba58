#pragma once

#include "ucso/msv/model.hpp"

namespace ucso::msv {

struct MwgState {
    MsvTheta theta;
    MsvChi chi;
    MsvLatent u;  // history latents u_{1:T}
};

struct MwgConfig {
    double scale_latent = 0.2;
    double scale_chi = 0.1;
    double scale_theta = 0.05;
    bool update_theta = false;  // framework-1 full posterior
    bool update_chi = true;
    bool use_likelihood = true;  // off: prior-targeting smoke tests
};

struct MwgStats {
    long proposed = 0;
    long accepted = 0;
    double rate() const { return proposed ? double(accepted) / double(proposed) : 0.0; }
};

// One full random-walk Metropolis-within-Gibbs sweep: per-time latent blocks
// (F_t, X_t, Psi_t), then chi blocks (rows of B, log V entries) and optionally
// theta~ blocks on their unconstrained scales.  Non-finite proposal densities
// are rejected, never fatal.  y holds log(1 + r), one column per time step.
void mwg_sweep(MwgState& state, const Eigen::MatrixXd& y, const MwgConfig& cfg, RngStream& rng,
               MwgStats* stats = nullptr);

}  // namespace ucso::msv
