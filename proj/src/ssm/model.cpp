#include "ucso/ssm/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ucso::ssm {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

void SsmParams::validate() const {
    if (!(sigma > 0.0)) throw std::domain_error("ssm: sigma must be positive");
    if (!(Sigma > 0.0)) throw std::domain_error("ssm: Sigma must be positive");
    if (!(std::abs(mu) < 1.0)) throw std::domain_error("ssm: |mu| must be < 1");
}

double log_obs_density(double y, double x, double sigma, ModelIndex m) {
    if (!(sigma > 0.0)) throw std::domain_error("log_obs_density: sigma must be positive");
    const double u = (y - x) / sigma;
    if (m.gaussian()) return -0.5 * kLog2Pi - std::log(sigma) - 0.5 * u * u;
    if (m.dof < 1) throw std::domain_error("log_obs_density: dof must be >= 1");
    const double nu = double(m.dof);
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * M_PI) -
           std::log(sigma) - 0.5 * (nu + 1.0) * std::log1p(u * u / nu);
}

void grad_obs(double y, double x, double sigma, ModelIndex m, double& d_sigma, double& d_x) {
    if (!(sigma > 0.0)) throw std::domain_error("grad_obs: sigma must be positive");
    const double u = (y - x) / sigma;
    if (m.gaussian()) {
        d_sigma = -1.0 / sigma + u * u / sigma;
        d_x = u / sigma;
        return;
    }
    if (m.dof < 1) throw std::domain_error("grad_obs: dof must be >= 1");
    const double nu = double(m.dof);
    const double c = (nu + 1.0) / (nu + u * u);
    d_sigma = -1.0 / sigma + c * u * u / sigma;
    d_x = c * u / sigma;
}

double log_transition(double x_n, double x_prev, double mu, double Sigma) {
    if (!(Sigma > 0.0)) throw std::domain_error("log_transition: Sigma must be positive");
    const double r = x_n - mu * x_prev;
    return -0.5 * kLog2Pi - 0.5 * std::log(Sigma) - 0.5 * r * r / Sigma;
}

void grad_transition(double x_n, double x_prev, double mu, double Sigma, double& d_mu,
                     double& d_Sigma) {
    if (!(Sigma > 0.0)) throw std::domain_error("grad_transition: Sigma must be positive");
    const double r = x_n - mu * x_prev;
    d_mu = r * x_prev / Sigma;
    d_Sigma = -0.5 / Sigma + 0.5 * r * r / (Sigma * Sigma);
}

Eigen::Vector3d score_integrand(const LatentPath& path, const SsmData& data, ModelIndex m,
                                const SsmParams& params) {
    if (path.size() != data.y.size())
        throw std::invalid_argument("score_integrand: path and data lengths differ");
    Eigen::Vector3d out = Eigen::Vector3d::Zero();
    double prev = data.x0;
    for (Eigen::Index n = 0; n < path.size(); ++n) {
        double d_sigma, d_x, d_mu, d_Sigma;
        grad_obs(data.y(n), path(n), params.sigma, m, d_sigma, d_x);
        grad_transition(path(n), prev, params.mu, params.Sigma, d_mu, d_Sigma);
        out(0) += d_sigma;
        out(1) += d_mu;
        out(2) += d_Sigma;
        prev = path(n);
    }
    return out;
}

SsmData simulate(const SsmParams& params, ModelIndex m, Eigen::Index horizon, RngStream& rng,
                 double x0) {
    params.validate();
    if (horizon < 1) throw std::invalid_argument("simulate: horizon must be >= 1");
    SsmData data;
    data.x0 = x0;
    data.params_true = params;
    data.m_true = m.dof;
    data.x_true.resize(horizon);
    data.y.resize(horizon);
    double x = x0;
    const double sd = std::sqrt(params.Sigma);
    for (Eigen::Index n = 0; n < horizon; ++n) {
        x = params.mu * x + sd * rng.normal();
        data.x_true(n) = x;
        const double noise = m.gaussian() ? rng.normal() : rng.student_t(double(m.dof));
        data.y(n) = x + params.sigma * noise;
    }
    return data;
}

LatentPath sample_prior_path(const SsmParams& params, double x0, Eigen::Index horizon,
                             RngStream& rng) {
    LatentPath path(horizon);
    double x = x0;
    const double sd = std::sqrt(params.Sigma);
    for (Eigen::Index n = 0; n < horizon; ++n) {
        x = params.mu * x + sd * rng.normal();
        path(n) = x;
    }
    return path;
}

void save_dataset(const SsmData& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
    out.precision(17);
    out << "# ssm-dataset v1\n";
    out << "# sigma=" << data.params_true.sigma << " mu=" << data.params_true.mu
        << " Sigma=" << data.params_true.Sigma << "\n";
    out << "# m=" << data.m_true << " seed=" << data.seed << " x0=" << data.x0
        << " T=" << data.y.size() << " latent=" << (data.x_true.size() > 0 ? 1 : 0) << "\n";
    for (Eigen::Index n = 0; n < data.y.size(); ++n) {
        out << data.y(n);
        if (data.x_true.size() > 0) out << " " << data.x_true(n);
        out << "\n";
    }
}

SsmData load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ssm-dataset", 0) != 0)
        throw std::runtime_error("load_dataset: bad header in " + path);
    SsmData data;
    Eigen::Index horizon = 0;
    int latent = 0;
    auto parse_kv = [&](const std::string& header) {
        std::istringstream ss(header.substr(1));
        std::string tok;
        while (ss >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = tok.substr(0, eq);
            const std::string val = tok.substr(eq + 1);
            if (key == "sigma") data.params_true.sigma = std::stod(val);
            else if (key == "mu") data.params_true.mu = std::stod(val);
            else if (key == "Sigma") data.params_true.Sigma = std::stod(val);
            else if (key == "m") data.m_true = std::stoll(val);
            else if (key == "seed") data.seed = std::stoull(val);
            else if (key == "x0") data.x0 = std::stod(val);
            else if (key == "T") horizon = std::stoll(val);
            else if (key == "latent") latent = std::stoi(val);
        }
    };
    std::getline(in, line);
    parse_kv(line);
    std::getline(in, line);
    parse_kv(line);
    if (horizon < 1) throw std::runtime_error("load_dataset: missing T in " + path);
    data.y.resize(horizon);
    if (latent) data.x_true.resize(horizon);
    for (Eigen::Index n = 0; n < horizon; ++n) {
        if (!std::getline(in, line)) throw std::runtime_error("load_dataset: truncated file " + path);
        std::istringstream ss(line);
        ss >> data.y(n);
        if (latent) ss >> data.x_true(n);
        if (!ss) throw std::runtime_error("load_dataset: malformed row in " + path);
    }
    return data;
}

}  // namespace ucso::ssm
