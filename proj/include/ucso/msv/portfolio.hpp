#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ucso::msv {

// Long-only portfolio weights from unconstrained logits, max-shifted.
Eigen::VectorXd softmax_weights(const Eigen::VectorXd& xi);
// J_{ab} = w_a (delta_{ab} - w_b)
Eigen::MatrixXd softmax_jacobian(const Eigen::VectorXd& xi);

// (1/T') sum_t { w^T R_t - (zeta/2) (w^T (R_t - mu_t^a)) (w^T (R_t - mu_t^b)) }.
// With mu_a == mu_b this is the plug-in penalty; passing two independent
// predictive-mean batches makes the quadratic term unbiased.
double payoff_g(const Eigen::MatrixXd& returns, const Eigen::MatrixXd& pred_mean_a,
                const Eigen::MatrixXd& pred_mean_b, const Eigen::VectorXd& weights, double zeta);

// d payoff / d weights
Eigen::VectorXd grad_payoff_wrt_weights(const Eigen::MatrixXd& returns,
                                        const Eigen::MatrixXd& pred_mean_a,
                                        const Eigen::MatrixXd& pred_mean_b,
                                        const Eigen::VectorXd& weights, double zeta);

// softmax_jacobian^T * d payoff / d weights
Eigen::VectorXd grad_payoff_wrt_logits(const Eigen::MatrixXd& returns,
                                       const Eigen::MatrixXd& pred_mean_a,
                                       const Eigen::MatrixXd& pred_mean_b,
                                       const Eigen::VectorXd& xi, double zeta);

struct BacktestMetrics {
    double final_wealth = 1.0;
    double pct_gain = 0.0;   // average positive period return, %
    double pct_loss = 0.0;   // average negative period return, %
    double mdd = 0.0;        // maximum drawdown, %
    double pct_wt = 0.0;     // winning periods, %
    double ann_ret = 0.0;    // annualized (252) mean, %
    double ann_vol = 0.0;    // annualized stdev, %
    double sharpe = 0.0;
    bool sharpe_defined = true;
};

BacktestMetrics backtest_metrics(const std::vector<double>& period_returns);

}  // namespace ucso::msv
