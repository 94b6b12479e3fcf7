#include "efcml/antecedent.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace efcml {

namespace {

constexpr double kInvCovEigBound = 1e8;
constexpr double kCovFloorScale = 1e-8;
constexpr double kSigmaFloorScale = 1e-3;
// per-coordinate variance floor as a fraction of the global running variance;
// a locally constant coordinate must not make every deviation look novel
constexpr double kCoordVarFloorFraction = 0.02;

VectorXd coordinate_floor(const StreamStats& stats) {
    const VectorXd sd = stats.stddev();
    return kCoordVarFloorFraction * sd.cwiseProduct(sd);
}

MatrixXd invert_spd(const MatrixXd& m) {
    Eigen::LDLT<MatrixXd> ldlt(m);
    if (ldlt.info() != Eigen::Success)
        throw SingularHessianError("SPD inversion failed");
    MatrixXd inv = ldlt.solve(MatrixXd::Identity(m.rows(), m.cols()));
    return 0.5 * (inv + inv.transpose());
}

}  // namespace

void StreamStats::update(const VectorXd& z) {
    if (z.size() != mean.size()) throw DimensionMismatchError("stream stats dimension mismatch");
    minv = minv.cwiseMin(z);
    maxv = maxv.cwiseMax(z);
    n += 1.0;
    const VectorXd delta = z - mean;
    mean += delta / n;
    m2 += delta.cwiseProduct(z - mean);
}

VectorXd StreamStats::range() const {
    if (n < 1.0) return VectorXd::Zero(mean.size());
    return maxv - minv;
}

VectorXd StreamStats::stddev() const {
    if (n < 1.0) return VectorXd::Zero(mean.size());
    return (m2 / n).cwiseMax(0.0).cwiseSqrt();
}

double tolerance_radius(double fac, Index dim, double support, int m) {
    const double shrink = 1.0 - 1.0 / (support + 1.0);
    return fac * std::pow(static_cast<double>(dim), 1.0 / std::sqrt(2.0)) /
           std::pow(shrink, static_cast<double>(m));
}

EvolutionCheck evolution_check(const RuleBase& rb, const VectorXd& z) {
    if (rb.rules.empty()) throw IndexOutOfRangeError("evolution check on empty rule base");
    if (z.size() != rb.rules.front().center.size())
        throw DimensionMismatchError("product-space vector dimension mismatch");

    EvolutionCheck out;
    out.ma_win = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < rb.rule_count(); ++i) {
        const double ma = mahalanobis(rb.rules[static_cast<std::size_t>(i)], z);
        if (ma < out.ma_win) {
            out.ma_win = ma;
            out.win = i;
        }
    }
    const double support = rb.rules[static_cast<std::size_t>(out.win)].support;
    out.r_win = tolerance_radius(rb.config.fac, z.size(), support, rb.config.m);
    out.fires = out.ma_win > out.r_win;
    return out;
}

void evolve_rule(RuleBase& rb, const VectorXd& x, const VectorXd& y, const StreamStats& stats) {
    const Index dim = x.size() + y.size();
    if (stats.mean.size() != dim) throw DimensionMismatchError("stream stats cover a different space");

    VectorXd z(dim);
    z.head(x.size()) = x;
    z.tail(y.size()) = y;

    Rule r = blank_rule(dim, x.size(), y.size(), rb.config.rls_init);
    r.center = z;

    const VectorXd range = stats.range();
    const VectorXd sigma = stats.stddev();
    const VectorXd floor = coordinate_floor(stats);
    for (Index j = 0; j < dim; ++j) {
        const double eps = rb.config.eps_fraction * range(j);
        const double sd = std::max(sigma(j), kSigmaFloorScale * range(j));
        double var = std::max(eps * sd, floor(j));
        if (var <= 0.0) var = 1.0;
        r.cov_diag(j) = var;
        r.inv_cov(j, j) = 1.0 / var;
    }

    // consequents from the Mahalanobis-nearest rule, ties to the lower index
    if (!rb.rules.empty()) {
        Index best = 0;
        double best_ma = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < rb.rule_count(); ++i) {
            const double ma = mahalanobis(rb.rules[static_cast<std::size_t>(i)], z);
            if (ma < best_ma) {
                best_ma = ma;
                best = i;
            }
        }
        r.consequents = rb.rules[static_cast<std::size_t>(best)].consequents;
    }
    // keep P^-1 W = info exact so the first proximal correction starts at rest
    r.info = r.consequents / rb.config.rls_init;

    r.support = 1.0;
    r.weight_sum = 1.0;
    r.wmean_y = y;
    r.yqy = y.squaredNorm();

    rb.rules.push_back(std::move(r));
}

void update_winner(RuleBase& rb, Index win, const VectorXd& z, const StreamStats& stats) {
    if (win < 0 || win >= rb.rule_count()) throw IndexOutOfRangeError("winner index out of range");
    Rule& r = rb.rules[static_cast<std::size_t>(win)];
    if (z.size() != r.center.size()) throw DimensionMismatchError("winner update dimension mismatch");

    const double t = r.support + 1.0;
    const VectorXd u = z - r.center;
    r.center += u / t;
    r.support = t;

    // Sigma_t = (t-1)/t (Sigma_{t-1} + u u^T / t), inverted in place
    const VectorXd au = r.inv_cov * u;
    const double denom = 1.0 + u.dot(au) / t;
    r.inv_cov -= (au * au.transpose()) / (t * denom);
    r.inv_cov *= t / (t - 1.0);
    r.inv_cov = 0.5 * (r.inv_cov + r.inv_cov.transpose()).eval();
    r.cov_diag = (t - 1.0) / t * (r.cov_diag + u.cwiseProduct(u) / t);

    // per-coordinate floor: a locally constant coordinate would otherwise
    // collapse and turn every later deviation into a spurious rule birth
    const VectorXd floor = coordinate_floor(stats);
    for (Index j = 0; j < r.cov_diag.size(); ++j) {
        if (r.cov_diag(j) >= floor(j)) continue;
        const double delta = floor(j) - r.cov_diag(j);
        const VectorXd col = r.inv_cov.col(j);
        r.inv_cov -= (delta / (1.0 + delta * col(j))) * (col * col.transpose());
        r.inv_cov = 0.5 * (r.inv_cov + r.inv_cov.transpose()).eval();
        r.cov_diag(j) = floor(j);
    }

    // conditioning guard against total covariance collapse
    if (r.inv_cov.diagonal().minCoeff() > kInvCovEigBound) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(r.inv_cov, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() > kInvCovEigBound) {
            MatrixXd cov = invert_spd(r.inv_cov);
            VectorXd range = stats.range();
            for (Index j = 0; j < range.size(); ++j)
                if (range(j) <= 0.0) range(j) = 1.0;
            cov += kCovFloorScale * range.cwiseProduct(range).asDiagonal();
            r.inv_cov = invert_spd(cov);
            r.cov_diag = cov.diagonal();
        }
    }
}

namespace {

// overlap bound scales with the clustered-space dimension like the
// evolution radius; estimation noise alone separates duplicate rules by
// about sqrt(d / support), so an absolute bound starves merging in high d
double merge_bound(const RuleBase& rb) {
    const Index dim = rb.rules.front().center.size();
    return rb.config.merge_kappa * std::pow(static_cast<double>(dim), 1.0 / std::sqrt(2.0));
}

void consider_pair(const RuleBase& rb, Index i, Index k, double bound,
                   std::optional<std::pair<Index, Index>>& best, double& best_score) {
    const Rule& ri = rb.rules[static_cast<std::size_t>(i)];
    const Rule& rk = rb.rules[static_cast<std::size_t>(k)];
    const double d_ik = mahalanobis(ri, rk.center);
    if (d_ik > bound) return;
    const double d_ki = mahalanobis(rk, ri.center);
    if (d_ki > bound) return;
    const double score = d_ik + d_ki;
    if (score < best_score) {
        best_score = score;
        if (rk.support > ri.support)
            best = std::make_pair(k, i);
        else
            best = std::make_pair(i, k);
    }
}

}  // namespace

std::optional<std::pair<Index, Index>> merge_check(const RuleBase& rb) {
    const Index c = rb.rule_count();
    if (c < 2) return std::nullopt;
    const double bound = merge_bound(rb);
    std::optional<std::pair<Index, Index>> best;
    double best_score = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < c; ++i)
        for (Index k = i + 1; k < c; ++k) consider_pair(rb, i, k, bound, best, best_score);
    return best;
}

std::optional<std::pair<Index, Index>> merge_check(const RuleBase& rb, Index changed) {
    const Index c = rb.rule_count();
    if (c < 2) return std::nullopt;
    const double bound = merge_bound(rb);
    std::optional<std::pair<Index, Index>> best;
    double best_score = std::numeric_limits<double>::infinity();
    for (Index other = 0; other < c; ++other) {
        if (other == changed) continue;
        const Index i = std::min(changed, other);
        const Index k = std::max(changed, other);
        consider_pair(rb, i, k, bound, best, best_score);
    }
    return best;
}

void merge_rules(RuleBase& rb, Index i, Index k) {
    const Index c = rb.rule_count();
    if (i < 0 || i >= c || k < 0 || k >= c || i == k)
        throw IndexOutOfRangeError("bad merge indices");
    Rule& keep = rb.rules[static_cast<std::size_t>(i)];
    Rule& gone = rb.rules[static_cast<std::size_t>(k)];

    const double ki = keep.support;
    const double kk = gone.support;
    const double share = kk / (ki + kk);

    // consequent consistency: hyperplane angle similarity vs antecedent overlap
    const Index p = keep.consequents.rows() - 1;
    double s_cons = 0.0;
    for (Index c2 = 0; c2 < keep.consequents.cols(); ++c2) {
        VectorXd ni(p + 1), nk(p + 1);
        ni.head(p) = keep.consequents.col(c2).head(p);
        nk.head(p) = gone.consequents.col(c2).head(p);
        ni(p) = -1.0;
        nk(p) = -1.0;
        s_cons += std::abs(ni.dot(nk)) / (ni.norm() * nk.norm());
    }
    s_cons /= static_cast<double>(keep.consequents.cols());
    const double s_ante = activation(keep, gone.center);
    const double rho = s_cons >= s_ante ? 1.0 : 0.0;

    keep.consequents += share * rho * (gone.consequents - keep.consequents);

    // Gaussian moment merge of the antecedents
    const VectorXd c_new = (ki * keep.center + kk * gone.center) / (ki + kk);
    const MatrixXd cov_i = invert_spd(keep.inv_cov);
    const MatrixXd cov_k = invert_spd(gone.inv_cov);
    const VectorXd di = keep.center - c_new;
    const VectorXd dk = gone.center - c_new;
    const MatrixXd cov_new =
        (ki * (cov_i + di * di.transpose()) + kk * (cov_k + dk * dk.transpose())) / (ki + kk);
    keep.center = c_new;
    keep.inv_cov = invert_spd(cov_new);
    keep.cov_diag = cov_new.diagonal();
    keep.support = ki + kk;

    // pooled weighted label statistics
    const double si = keep.weight_sum;
    const double sk = gone.weight_sum;
    const double st = si + sk;
    if (st > 0.0) {
        const VectorXd mean_new = (si * keep.wmean_y + sk * gone.wmean_y) / st;
        const VectorXd ei = keep.wmean_y - mean_new;
        const VectorXd ek = gone.wmean_y - mean_new;
        keep.wvar_y += gone.wvar_y + si * ei.cwiseProduct(ei) + sk * ek.cwiseProduct(ek);
        keep.wcov_y += gone.wcov_y + si * ei * ei.transpose() + sk * ek * ek.transpose();
        keep.wmean_y = mean_new;
        keep.weight_sum = st;
    }
    keep.info += gone.info;
    keep.yqy += gone.yqy;
    keep.reg_moment += gone.reg_moment;
    keep.hessian_prior += gone.hessian_prior;
    keep.inv_hessian = invert_spd(invert_spd(keep.inv_hessian) + invert_spd(gone.inv_hessian));
    keep.lip_warm.resize(0);

    rb.rules.erase(rb.rules.begin() + k);
}

}  // namespace efcml
