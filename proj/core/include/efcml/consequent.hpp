#pragma once

#include "efcml/rulebase.hpp"
#include "efcml/types.hpp"

#include <optional>
#include <vector>

namespace efcml {

/// Decomposition of the per-rule objective: weighted least squares,
/// Lasso (intercept row excluded) and the correlation coupling term.
struct ObjectiveTerms {
    double wls = 0.0;
    double lasso = 0.0;
    double corr = 0.0;
    double total = 0.0;
};

struct BatchFitResult {
    MatrixXd w;
    std::vector<double> objective_trace;  // total objective after W0 and each accepted step
    int iterations = 0;
    MatrixXd hessian;  // R^T Q R
    MatrixXd info;     // R^T Q Y^T
    double gamma = 0.0;
    double yqy = 0.0;
};

/// Weighted correlation coefficient between two label columns. Returns 0
/// when either weighted variance is below 1e-12.
double weighted_correlation(const VectorXd& labels_c, const VectorXd& labels_d,
                            const VectorXd& weights);

/// Anti-correlation matrix a_cd = 1 - corr_cd from accumulated unnormalized
/// weighted variances/covariances.
MatrixXd anti_correlation(const VectorXd& wvar, const MatrixXd& wcov);

/// Anti-correlation matrix from raw labels (K x N) and weights (batch form).
MatrixXd anti_correlation_batch(const MatrixXd& labels, const VectorXd& weights);

/// Gradient of the smooth objective terms at W:
/// R^T Q R W - R^T Q Y^T + 2 beta W A.
MatrixXd gradient(const MatrixXd& w, const MatrixXd& hessian, const MatrixXd& info,
                  const MatrixXd& anti_corr, double beta);

/// Step-size constant sqrt(lambda_max(R^T Q R) + lambda_max(beta A)); the
/// solvers back the step off when it overshoots.
double lipschitz(const MatrixXd& hessian, const MatrixXd& anti_corr, double beta);

/// Entrywise soft threshold with level t >= 0.
MatrixXd soft_threshold(const MatrixXd& x, double t);

/// Smallest eigenvalue of hessian + beta*A (positive on every accepted step
/// when the objective is convex).
double convexity_margin(const MatrixXd& hessian, const MatrixXd& anti_corr, double beta);

ObjectiveTerms objective_terms(const MatrixXd& w, const MatrixXd& hessian,
                               const MatrixXd& info, double yqy,
                               const MatrixXd& anti_corr, double alpha, double beta);

/// Batch solver: ridge-started weighted least squares followed by proximal
/// gradient steps with soft thresholding. labels is K x N, regressors is
/// N x (p+1) with the intercept column last, weights is the diagonal of Q.
BatchFitResult batch_fit(const MatrixXd& regressors, const MatrixXd& labels,
                         const VectorXd& weights, const LearnConfig& cfg);

/// One recursive fuzzily weighted least squares step on (r, y) with
/// activation weight psi. With a mask, the Kalman gain is shared and only
/// the listed label columns of W are corrected; P updates unconditionally.
void rfwls_step(Rule& rule, const VectorXd& r, const VectorXd& y, double psi,
                const std::vector<Index>* mask = nullptr);

/// Update weighted label mean / variance / covariance sums and the running
/// weight sum for one sample.
void update_weighted_stats(Rule& rule, const VectorXd& y, double psi);

void update_info_matrix(Rule& rule, const VectorXd& r, const VectorXd& y, double psi,
                        const std::vector<Index>* mask = nullptr);

/// One full incremental consequent update for a single rule (the per-sample
/// single-pass algorithm): RFWLS, statistics recursions, anti-correlation and
/// Hessian refresh, then the proximal correction.
void incremental_step(Rule& rule, const VectorXd& x, const VectorXd& y, double psi,
                      const LearnConfig& cfg, const std::vector<Index>* mask = nullptr);

}  // namespace efcml
