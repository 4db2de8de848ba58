#pragma once

#include <vector>

#include "ucso/ssm/cpf.hpp"
#include "ucso/ssm/model.hpp"

namespace ucso::ssm {

// CSO embedding of the model-averaged score problem.  The outer state is the
// observation-model index drawn i.i.d. from its uniform prior; the inner
// chain is the CPF-BS kernel on latent paths; g is the score integrand with
// identity pass-through (grad_g = I, grad_f(u) = u), so the assembled term is
// the inner posterior expectation of the score integrand.
struct SsmCsoModel {
    SsmData data;
    std::vector<ModelIndex> model_set;  // M
    PgasConfig pgas;
    int sweeps_per_step = 1;  // CPF-BS sweeps composed into one inner transition

    using Outer = ModelIndex;
    using Inner = LatentPath;

    int param_dim() const { return 3; }
    int output_dim() const { return 3; }

    Eigen::VectorXd eval_g(const ModelIndex& m, const LatentPath& x,
                           const Eigen::VectorXd& xi) const {
        return score_integrand(x, data, m, SsmParams::from_vector(xi));
    }
    Eigen::MatrixXd eval_grad_g(const ModelIndex&, const LatentPath&,
                                const Eigen::VectorXd&) const {
        return Eigen::MatrixXd::Identity(3, 3);
    }
    Eigen::VectorXd eval_grad_f(const ModelIndex&, const Eigen::VectorXd& u) const { return u; }

    Inner sample_initial(const ModelIndex&, const Eigen::VectorXd& xi, RngStream& rng) const {
        return sample_prior_path(SsmParams::from_vector(xi), data.x0, data.horizon(), rng);
    }
    Inner inner_step(const ModelIndex& m, const LatentPath& x, const Eigen::VectorXd& xi,
                     RngStream& rng) const {
        LatentPath out = x;
        for (int s = 0; s < sweeps_per_step; ++s)
            out = cpf_bs_kernel(out, data, m, SsmParams::from_vector(xi), pgas, rng);
        return out;
    }
    Outer outer_step(const ModelIndex&, RngStream& rng) const {
        return model_set[rng.uniform_index(model_set.size())];
    }
};

}  // namespace ucso::ssm
