#include "ucso/msv/portfolio.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ucso::msv {

Eigen::VectorXd softmax_weights(const Eigen::VectorXd& xi) {
    const double shift = xi.maxCoeff();
    Eigen::VectorXd w = (xi.array() - shift).exp();
    return w / w.sum();
}

Eigen::MatrixXd softmax_jacobian(const Eigen::VectorXd& xi) {
    const Eigen::VectorXd w = softmax_weights(xi);
    Eigen::MatrixXd j = -(w * w.transpose());
    j.diagonal() += w;
    return j;
}

double payoff_g(const Eigen::MatrixXd& returns, const Eigen::MatrixXd& pred_mean_a,
                const Eigen::MatrixXd& pred_mean_b, const Eigen::VectorXd& weights, double zeta) {
    const Eigen::Index horizon = returns.cols();
    if (horizon < 1) throw std::invalid_argument("payoff_g: empty horizon");
    double acc = 0.0;
    for (Eigen::Index t = 0; t < horizon; ++t) {
        const double lin = weights.dot(returns.col(t));
        const double da = weights.dot(returns.col(t) - pred_mean_a.col(t));
        const double db = weights.dot(returns.col(t) - pred_mean_b.col(t));
        acc += lin - 0.5 * zeta * da * db;
    }
    return acc / double(horizon);
}

Eigen::VectorXd grad_payoff_wrt_weights(const Eigen::MatrixXd& returns,
                                        const Eigen::MatrixXd& pred_mean_a,
                                        const Eigen::MatrixXd& pred_mean_b,
                                        const Eigen::VectorXd& weights, double zeta) {
    const Eigen::Index horizon = returns.cols();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(weights.size());
    for (Eigen::Index t = 0; t < horizon; ++t) {
        const Eigen::VectorXd ca = returns.col(t) - pred_mean_a.col(t);
        const Eigen::VectorXd cb = returns.col(t) - pred_mean_b.col(t);
        grad += returns.col(t) - 0.5 * zeta * (weights.dot(cb) * ca + weights.dot(ca) * cb);
    }
    return grad / double(horizon);
}

Eigen::VectorXd grad_payoff_wrt_logits(const Eigen::MatrixXd& returns,
                                       const Eigen::MatrixXd& pred_mean_a,
                                       const Eigen::MatrixXd& pred_mean_b,
                                       const Eigen::VectorXd& xi, double zeta) {
    const Eigen::VectorXd w = softmax_weights(xi);
    return softmax_jacobian(xi).transpose() *
           grad_payoff_wrt_weights(returns, pred_mean_a, pred_mean_b, w, zeta);
}

BacktestMetrics backtest_metrics(const std::vector<double>& r) {
    if (r.size() < 2) throw std::invalid_argument("backtest_metrics: need at least 2 periods");
    BacktestMetrics m;
    double wealth = 1.0, peak = 1.0, mdd = 0.0;
    double gain_sum = 0.0, loss_sum = 0.0;
    int n_gain = 0, n_loss = 0, n_win = 0;
    double sum = 0.0, sum_sq = 0.0;
    for (double x : r) {
        wealth *= 1.0 + x;
        peak = std::max(peak, wealth);
        mdd = std::max(mdd, (peak - wealth) / peak);
        if (x > 0.0) {
            gain_sum += x;
            ++n_gain;
            ++n_win;
        } else if (x < 0.0) {
            loss_sum += x;
            ++n_loss;
        }
        sum += x;
        sum_sq += x * x;
    }
    const double n = double(r.size());
    const double mean = sum / n;
    const double var = (sum_sq - n * mean * mean) / (n - 1.0);
    m.final_wealth = wealth;
    m.pct_gain = n_gain ? 100.0 * gain_sum / n_gain : 0.0;
    m.pct_loss = n_loss ? 100.0 * loss_sum / n_loss : 0.0;
    m.mdd = 100.0 * mdd;
    m.pct_wt = 100.0 * n_win / n;
    m.ann_ret = 100.0 * mean * 252.0;
    m.ann_vol = 100.0 * std::sqrt(std::max(var, 0.0) * 252.0);
    if (m.ann_vol > 0.0) {
        m.sharpe = m.ann_ret / m.ann_vol;
    } else {
        m.sharpe = std::numeric_limits<double>::quiet_NaN();
        m.sharpe_defined = false;
    }
    return m;
}

}  // namespace ucso::msv
