#pragma once

#include "efcml/rulebase.hpp"
#include "efcml/types.hpp"

#include <optional>
#include <utility>

namespace efcml {

/// Running per-coordinate statistics of the clustered space: observed
/// ranges plus Welford mean/scatter, feeding eps and the newborn widths.
struct StreamStats {
    VectorXd minv;
    VectorXd maxv;
    VectorXd mean;
    VectorXd m2;
    double n = 0.0;

    explicit StreamStats(Index dim = 0)
        : minv(VectorXd::Constant(dim, std::numeric_limits<double>::infinity())),
          maxv(VectorXd::Constant(dim, -std::numeric_limits<double>::infinity())),
          mean(VectorXd::Zero(dim)),
          m2(VectorXd::Zero(dim)) {}

    void update(const VectorXd& z);
    VectorXd range() const;   // componentwise hi - lo, 0 before any data
    VectorXd stddev() const;  // running population standard deviation
};

struct EvolutionCheck {
    Index win = -1;
    double ma_win = 0.0;
    double r_win = 0.0;
    bool fires = false;
};

/// What happened to the rule structure on one processed sample.
struct EvolutionOutcome {
    enum class Kind { Evolved, Updated, Merged };
    Kind kind = Kind::Updated;
    Index index = -1;          // new rule / winner / kept rule
    Index removed = -1;        // merged-away rule, Merged only
    double min_distance = 0.0; // winning Mahalanobis distance
    double threshold = 0.0;    // r_win used
};

/// Rule evolution criterion: distance of z to the nearest rule against the
/// support-dependent tolerance radius r_win = fac * d^(1/sqrt(2)) /
/// (1 - 1/(k_win+1))^m, with d the clustered-space dimensionality.
EvolutionCheck evolution_check(const RuleBase& rb, const VectorXd& z);

/// Tolerance radius for a given support count (exposed for the selection
/// criteria, which reuse the evolution condition).
double tolerance_radius(double fac, Index dim, double support, int m);

/// Birth a new rule at z = (x, y): center at the sample, diagonal inverse
/// covariance from eps * running sigma, consequents copied from the
/// Mahalanobis-nearest rule (zeros when the base is empty).
void evolve_rule(RuleBase& rb, const VectorXd& x, const VectorXd& y, const StreamStats& stats);

/// Move the winner: incremental center mean plus the rank-one
/// Sherman-Morrison update of the inverse covariance.
void update_winner(RuleBase& rb, Index win, const VectorXd& z, const StreamStats& stats);

/// Mutual-overlap merge candidate: the pair whose centers lie within
/// kappa of each other under both inverse covariances, closest first.
/// Returned ordered so that .first has the larger support.
std::optional<std::pair<Index, Index>> merge_check(const RuleBase& rb);

/// merge_check restricted to pairs involving `changed`. Equivalent to the
/// full scan inside the per-sample loop, where at most one rule moves
/// between checks (an unchanged pair cannot become overlapping).
std::optional<std::pair<Index, Index>> merge_check(const RuleBase& rb, Index changed);

/// Fuse rule k into rule i: consequents blended by support share and
/// consistency, antecedents merged by Gaussian moment matching, sufficient
/// statistics pooled.
void merge_rules(RuleBase& rb, Index i, Index k);

}  // namespace efcml
