#include "ucso/msv/instance.hpp"

#include <fstream>
#include <sstream>

#include "ucso/msv/model.hpp"

namespace ucso::msv {

MsvInstance make_synthetic_instance(int p, int k, Eigen::Index history,
                                    Eigen::Index horizon_future, std::uint64_t seed) {
    MsvInstance inst;
    inst.horizon_future = horizon_future;
    inst.seed = seed;
    RngStream root(seed);

    // mild parameter draws, within prior-plausible territory
    RngStream pr = root.child("params");
    auto triple = [&](double mean_center) {
        ArTriple t;
        t.phi = 0.9;
        t.mean = mean_center + 0.3 * pr.normal();
        t.sigma = 0.15 + 0.05 * pr.uniform();
        return t;
    };
    for (int i = 0; i < k; ++i) inst.params.theta.x.push_back(triple(-2.5));
    for (int i = 0; i < n_rotation(k); ++i) inst.params.theta.psi.push_back(triple(0.0));
    inst.params.chi.B.resize(p, k);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < k; ++j) inst.params.chi.B(i, j) = 0.3 * pr.normal();
    inst.params.chi.V.resize(p);
    for (Eigen::Index i = 0; i < p; ++i)
        inst.params.chi.V(i) = std::exp(-2.5 + 0.3 * pr.normal());
    inst.params.validate();

    RngStream sim = root.child("sim");
    MsvLatent u = simulate_latents(inst.params.theta, history, sim);
    inst.returns = simulate_returns(inst.params.chi, u.F, sim);
    return inst;
}

void save_instance(const MsvInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_instance: cannot open " + path);
    out.precision(17);
    const int p = inst.assets(), k = inst.factors();
    out << "# msv-instance v1\n";
    out << "p " << p << "\nK " << k << "\nT " << inst.returns.cols() << "\nTprime "
        << inst.horizon_future << "\nseed " << inst.seed << "\n";
    out << "theta_x\n";
    for (const auto& t : inst.params.theta.x) out << t.phi << " " << t.mean << " " << t.sigma << "\n";
    out << "theta_psi\n";
    for (const auto& t : inst.params.theta.psi)
        out << t.phi << " " << t.mean << " " << t.sigma << "\n";
    out << "B\n";
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) out << (j ? " " : "") << inst.params.chi.B(i, j);
        out << "\n";
    }
    out << "V\n";
    for (Eigen::Index i = 0; i < p; ++i) out << (i ? " " : "") << inst.params.chi.V(i);
    out << "\nreturns\n";
    for (Eigen::Index t = 0; t < inst.returns.cols(); ++t) {
        for (Eigen::Index i = 0; i < p; ++i) out << (i ? " " : "") << inst.returns(i, t);
        out << "\n";
    }
}

MsvInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_instance: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "# msv-instance v1")
        throw std::runtime_error("load_instance: bad header in " + path);
    auto expect = [&](const std::string& key) {
        if (!std::getline(in, line)) throw std::runtime_error("load_instance: truncated " + path);
        std::istringstream ss(line);
        std::string k2;
        ss >> k2;
        if (k2 != key) throw std::runtime_error("load_instance: expected " + key + " in " + path);
        return ss;
    };
    MsvInstance inst;
    int p, k;
    Eigen::Index history;
    { auto ss = expect("p"); ss >> p; }
    { auto ss = expect("K"); ss >> k; }
    { auto ss = expect("T"); ss >> history; }
    { auto ss = expect("Tprime"); ss >> inst.horizon_future; }
    { auto ss = expect("seed"); ss >> inst.seed; }
    expect("theta_x");
    for (int i = 0; i < k; ++i) {
        std::getline(in, line);
        std::istringstream ss(line);
        ArTriple t;
        ss >> t.phi >> t.mean >> t.sigma;
        inst.params.theta.x.push_back(t);
    }
    expect("theta_psi");
    for (int i = 0; i < n_rotation(k); ++i) {
        std::getline(in, line);
        std::istringstream ss(line);
        ArTriple t;
        ss >> t.phi >> t.mean >> t.sigma;
        inst.params.theta.psi.push_back(t);
    }
    expect("B");
    inst.params.chi.B.resize(p, k);
    for (int i = 0; i < p; ++i) {
        std::getline(in, line);
        std::istringstream ss(line);
        for (int j = 0; j < k; ++j) ss >> inst.params.chi.B(i, j);
    }
    {
        auto ss = expect("V");
        inst.params.chi.V.resize(p);
    }
    std::getline(in, line);
    {
        std::istringstream ss(line);
        for (int i = 0; i < p; ++i) ss >> inst.params.chi.V(i);
    }
    expect("returns");
    inst.returns.resize(p, history);
    for (Eigen::Index t = 0; t < history; ++t) {
        std::getline(in, line);
        std::istringstream ss(line);
        for (int i = 0; i < p; ++i) ss >> inst.returns(i, t);
    }
    inst.params.validate();
    return inst;
}

}  // namespace ucso::msv
