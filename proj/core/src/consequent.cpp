#include "efcml/consequent.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace efcml {

namespace {

constexpr double kVarFloor = 1e-12;
constexpr double kPsiFloor = 1e-300;

double lambda_max_sym(const MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

/// Warm-started power iteration for the largest eigenvalue of an SPD matrix.
double lambda_max_power(const MatrixXd& m, VectorXd& warm) {
    const Index n = m.rows();
    if (warm.size() != n) {
        warm = VectorXd::Ones(n).normalized();
        for (int it = 0; it < 12; ++it) {
            VectorXd next = m * warm;
            double nn = next.norm();
            if (nn <= 0.0) return 0.0;
            warm = next / nn;
        }
    }
    double lambda = 0.0;
    for (int it = 0; it < 3; ++it) {
        VectorXd next = m * warm;
        double nn = next.norm();
        if (nn <= 0.0) return 0.0;
        lambda = warm.dot(next);
        warm = next / nn;
    }
    return lambda;
}

/// Soft threshold applied to the coefficient rows only; the intercept row
/// (last) passes through unshrunk.
MatrixXd shrink_coefficients(const MatrixXd& x, double t) {
    MatrixXd out(x.rows(), x.cols());
    const Index pr = x.rows() - 1;
    out.topRows(pr) = soft_threshold(x.topRows(pr), t);
    out.row(pr) = x.row(pr);
    return out;
}

struct ProxState {
    MatrixXd hessian;
    MatrixXd info;
    MatrixXd anti_corr;
    double yqy = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double lip = 1.0;
};

double prox_objective(const ProxState& s, const MatrixXd& w) {
    return objective_terms(w, s.hessian, s.info, s.yqy, s.anti_corr, s.alpha, s.beta).total;
}

/// Shared proximal descent loop with step backtracking. Returns the
/// objective after the start point and after each accepted iteration.
std::vector<double> prox_descend(MatrixXd& w, const ProxState& s, int max_iters, double tol,
                                 const std::vector<Index>* mask) {
    std::vector<double> trace;
    trace.push_back(prox_objective(s, w));
    for (int t = 0; t < max_iters; ++t) {
        const MatrixXd grad = gradient(w, s.hessian, s.info, s.anti_corr, s.beta);
        double step = 1.0 / std::max(s.lip, 1e-12);
        MatrixXd cand;
        bool accepted = false;
        for (int h = 0; h <= 8; ++h) {
            cand = shrink_coefficients(w - step * grad, s.alpha * step);
            if (mask) {
                MatrixXd masked = w;
                for (Index c : *mask) masked.col(c) = cand.col(c);
                cand = std::move(masked);
            }
            if (prox_objective(s, cand) <= trace.back()) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        const double moved = (cand - w).norm();
        if (moved < tol) break;  // converged; a sub-tolerance move is noise
        w = std::move(cand);
        trace.push_back(prox_objective(s, w));
    }
    return trace;
}

}  // namespace

double weighted_correlation(const VectorXd& labels_c, const VectorXd& labels_d,
                            const VectorXd& weights) {
    const Index n = labels_c.size();
    if (labels_d.size() != n || weights.size() != n)
        throw DimensionMismatchError("weighted_correlation length mismatch");
    if (n < 1) throw DimensionMismatchError("weighted_correlation needs at least one sample");
    const double sw = weights.sum();
    const double mc = weights.dot(labels_c) / sw;
    const double md = weights.dot(labels_d) / sw;
    const VectorXd uc = labels_c.array() - mc;
    const VectorXd ud = labels_d.array() - md;
    const double var_c = (weights.array() * uc.array().square()).sum();
    const double var_d = (weights.array() * ud.array().square()).sum();
    if (var_c < kVarFloor || var_d < kVarFloor) return 0.0;
    const double cov = (weights.array() * uc.array() * ud.array()).sum();
    return std::clamp(cov / (std::sqrt(var_c) * std::sqrt(var_d)), -1.0, 1.0);
}

MatrixXd anti_correlation(const VectorXd& wvar, const MatrixXd& wcov) {
    const Index k = wvar.size();
    MatrixXd a(k, k);
    for (Index c = 0; c < k; ++c) {
        a(c, c) = 0.0;  // self-correlation is identically 1
        for (Index d = c + 1; d < k; ++d) {
            double corr = 0.0;
            if (wvar(c) >= kVarFloor && wvar(d) >= kVarFloor)
                corr = std::clamp(wcov(c, d) / (std::sqrt(wvar(c)) * std::sqrt(wvar(d))), -1.0, 1.0);
            a(c, d) = a(d, c) = 1.0 - corr;
        }
    }
    return a;
}

MatrixXd anti_correlation_batch(const MatrixXd& labels, const VectorXd& weights) {
    const Index k = labels.rows();
    MatrixXd a(k, k);
    for (Index c = 0; c < k; ++c) {
        a(c, c) = 0.0;
        for (Index d = c + 1; d < k; ++d) {
            const double corr =
                weighted_correlation(labels.row(c).transpose(), labels.row(d).transpose(), weights);
            a(c, d) = a(d, c) = 1.0 - corr;
        }
    }
    return a;
}

MatrixXd gradient(const MatrixXd& w, const MatrixXd& hessian, const MatrixXd& info,
                  const MatrixXd& anti_corr, double beta) {
    if (hessian.cols() != w.rows() || info.rows() != w.rows() || info.cols() != w.cols() ||
        anti_corr.rows() != w.cols())
        throw DimensionMismatchError("gradient shape mismatch");
    return hessian * w - info + 2.0 * beta * (w * anti_corr);
}

double lipschitz(const MatrixXd& hessian, const MatrixXd& anti_corr, double beta) {
    if (!hessian.allFinite() || !anti_corr.allFinite())
        throw NonFiniteInputError("non-finite lipschitz input");
    const double sum = lambda_max_sym(hessian) + lambda_max_sym(beta * anti_corr);
    return std::sqrt(std::max(sum, 0.0));
}

MatrixXd soft_threshold(const MatrixXd& x, double t) {
    return x.unaryExpr([t](double v) {
        if (v > t) return v - t;
        if (v < -t) return v + t;
        return 0.0;
    });
}

double convexity_margin(const MatrixXd& hessian, const MatrixXd& anti_corr, double beta) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(hessian + beta * anti_corr, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

ObjectiveTerms objective_terms(const MatrixXd& w, const MatrixXd& hessian,
                               const MatrixXd& info, double yqy,
                               const MatrixXd& anti_corr, double alpha, double beta) {
    ObjectiveTerms t;
    t.wls = 0.5 * (yqy - 2.0 * (w.cwiseProduct(info)).sum() +
                   (w.cwiseProduct(hessian * w)).sum());
    t.lasso = alpha * w.topRows(w.rows() - 1).cwiseAbs().sum();
    t.corr = beta * (w.cwiseProduct(w * anti_corr)).sum();
    t.total = t.wls + t.lasso + t.corr;
    return t;
}

BatchFitResult batch_fit(const MatrixXd& regressors, const MatrixXd& labels,
                         const VectorXd& weights, const LearnConfig& cfg) {
    const Index n = regressors.rows();
    const Index d = regressors.cols();
    const Index k = labels.rows();
    if (labels.cols() != n || weights.size() != n)
        throw DimensionMismatchError("batch_fit shape mismatch");
    if (!regressors.allFinite() || !labels.allFinite() || !weights.allFinite())
        throw NonFiniteInputError("non-finite batch_fit input");

    const MatrixXd rq = regressors.transpose() * weights.asDiagonal();
    ProxState s;
    s.hessian = rq * regressors;
    s.hessian = 0.5 * (s.hessian + s.hessian.transpose());
    s.info = rq * labels.transpose();
    s.yqy = (labels.array().square().matrix() * weights).sum();
    s.anti_corr = anti_correlation_batch(labels, weights);
    s.alpha = cfg.alpha;
    s.beta = cfg.beta;

    // ridge start, condition-driven
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(s.hessian, Eigen::EigenvaluesOnly);
    const double lmax = es.eigenvalues().maxCoeff();
    const double lmin = es.eigenvalues().minCoeff();
    constexpr double kCondTarget = 1e8;
    double gamma = 0.0;
    if (lmin <= 0.0 || lmax / lmin > kCondTarget) gamma = lmax / kCondTarget;
    Eigen::LDLT<MatrixXd> ldlt(s.hessian + gamma * MatrixXd::Identity(d, d));
    if (ldlt.info() != Eigen::Success)
        throw SingularHessianError("weighted normal equations are singular");

    BatchFitResult out;
    out.w = ldlt.solve(s.info);
    s.lip = lipschitz(s.hessian, s.anti_corr, cfg.beta);
    out.objective_trace = prox_descend(out.w, s, cfg.max_prox_iters, cfg.prox_tol, nullptr);
    out.iterations = static_cast<int>(out.objective_trace.size()) - 1;
    out.hessian = std::move(s.hessian);
    out.info = std::move(s.info);
    out.gamma = gamma;
    out.yqy = s.yqy;
    return out;
}

void rfwls_step(Rule& rule, const VectorXd& r, const VectorXd& y, double psi,
                const std::vector<Index>* mask) {
    if (!r.allFinite() || !y.allFinite() || !std::isfinite(psi))
        throw NonFiniteInputError("non-finite rfwls input");
    psi = std::max(psi, kPsiFloor);
    const VectorXd pr = rule.inv_hessian * r;
    const double denom = 1.0 / psi + r.dot(pr);
    const VectorXd gain = pr / denom;
    if (mask) {
        for (Index c : *mask)
            rule.consequents.col(c) += gain * (y(c) - r.dot(rule.consequents.col(c)));
    } else {
        const Eigen::RowVectorXd err = y.transpose() - r.transpose() * rule.consequents;
        rule.consequents += gain * err;
    }
    rule.inv_hessian -= gain * (r.transpose() * rule.inv_hessian);
    rule.inv_hessian = 0.5 * (rule.inv_hessian + rule.inv_hessian.transpose()).eval();
}

void update_weighted_stats(Rule& rule, const VectorXd& y, double psi) {
    if (psi <= 0.0) throw NonFiniteInputError("psi must be positive");
    if (rule.weight_sum <= 0.0) rule.wmean_y = y;  // base case: first contribution
    const VectorXd mean_old = rule.wmean_y;
    const double s_old = rule.weight_sum;
    rule.weight_sum = s_old + psi;
    rule.wmean_y = (mean_old * s_old + psi * y) / rule.weight_sum;
    const VectorXd dev_old = y - mean_old;
    const VectorXd dev_new = y - rule.wmean_y;
    rule.wvar_y += psi * dev_old.cwiseProduct(dev_new);
    MatrixXd inc = psi * dev_old * dev_new.transpose();
    rule.wcov_y += 0.5 * (inc + inc.transpose());
    rule.yqy += psi * y.squaredNorm();
}

void update_info_matrix(Rule& rule, const VectorXd& r, const VectorXd& y, double psi,
                        const std::vector<Index>* mask) {
    if (r.size() != rule.info.rows() || y.size() != rule.info.cols())
        throw DimensionMismatchError("info update shape mismatch");
    if (mask) {
        for (Index c : *mask) rule.info.col(c) += psi * y(c) * r;
    } else {
        rule.info += psi * r * y.transpose();
    }
}

void incremental_step(Rule& rule, const VectorXd& x, const VectorXd& y, double psi,
                      const LearnConfig& cfg, const std::vector<Index>* mask) {
    const VectorXd r = regressor(x);
    psi = std::max(psi, kPsiFloor);

    rfwls_step(rule, r, y, psi, mask);
    update_weighted_stats(rule, y, psi);
    rule.reg_moment += psi * r * r.transpose();

    if (cfg.alpha == 0.0 && cfg.beta == 0.0) {
        // the proximal correction is the identity at the RFWLS fixed point
        update_info_matrix(rule, r, y, psi, mask);
        return;
    }

    ProxState s;
    s.anti_corr = anti_correlation(rule.wvar_y, rule.wcov_y);
    if (cfg.hessian_from_p) {
        // P^-1 assembled from its maintained components (the RLS prior plus
        // the weighted second moment), saving the cubic solve per sample
        s.hessian = rule.reg_moment + rule.hessian_prior *
                                          MatrixXd::Identity(r.size(), r.size());
    } else {
        s.hessian = rule.reg_moment;
    }
    const double lm_h = lambda_max_power(s.hessian, rule.lip_warm);
    const double lm_a = cfg.beta > 0.0 ? lambda_max_sym(cfg.beta * s.anti_corr) : 0.0;
    s.lip = std::sqrt(std::max(lm_h + lm_a, 0.0));

    update_info_matrix(rule, r, y, psi, mask);

    s.info = rule.info;
    s.yqy = rule.yqy;
    s.alpha = cfg.alpha;
    s.beta = cfg.beta;
    prox_descend(rule.consequents, s, cfg.incr_prox_iters, cfg.prox_tol, mask);
}

}  // namespace efcml
