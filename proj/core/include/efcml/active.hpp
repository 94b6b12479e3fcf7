#pragma once

#include "efcml/rulebase.hpp"
#include "efcml/types.hpp"

#include <cstdint>
#include <vector>

namespace efcml {

enum class BudgetMode { LabelsBased, SamplesBased };

/// Budget accounting plus the multiplicative threshold-adaptation factor.
/// Units are labels in LabelsBased mode and samples in SamplesBased mode.
struct BudgetState {
    BudgetMode mode = BudgetMode::SamplesBased;
    double budget = 1.0;
    std::int64_t seen_samples = 0;
    std::int64_t seen_units = 0;
    std::int64_t selected_units = 0;
    double s = 1.0;  // adaptation factor, clamped to [adapt_min, adapt_max]

    double spend_fraction() const {
        return seen_units > 0 ? static_cast<double>(selected_units) / static_cast<double>(seen_units)
                              : 0.0;
    }
};

enum class Trigger : unsigned {
    Novelty = 1u << 0,
    OutputUncertainty = 1u << 1,
    ParamInstability = 1u << 2,
};

struct SelectionDecision {
    enum class Verdict { Full, Partial, None };
    Verdict verdict = Verdict::None;
    std::vector<Index> labels;   // annotated subset; all labels for Full
    unsigned triggers = 0;       // bitmask of Trigger
    double spend_after = 0.0;    // projected spend fraction if accepted
};

/// Novelty content: the rule evolution criterion evaluated on the
/// input-space part of the rules (labels are unknown before annotation).
bool novelty_criterion(const RuleBase& rb, const VectorXd& x);

/// Labels whose continuous outputs fall inside the ambiguity band around
/// 0.5; the band half-width scales with the adaptation factor s.
std::vector<Index> output_uncertainty(const VectorXd& yhat, double thresh2, double s);

/// A-optimality style downtrend probe: largest relative trace drop of any
/// rule's P under the unsupervised update with this sample, against
/// thresh3 / s. Rule state is left untouched.
bool param_instability(const RuleBase& rb, const VectorXd& x, double thresh3, double s);

/// True iff accepting a decision of the given cost keeps the spend
/// fraction within budget once this sample's units join the pool.
bool gate(const BudgetState& budget, std::int64_t decision_cost, std::int64_t unit);

/// Multiplicative threshold adaptation: shrink s after selections, grow it
/// after skips, clamped.
void adapt_thresholds(BudgetState& budget, bool selected, const LearnConfig& cfg);

/// Full selection pipeline for one unlabeled sample. Mutates the budget
/// state (seen counters, spend, adaptation factor).
SelectionDecision select(const RuleBase& rb, const VectorXd& x, BudgetState& budget);

}  // namespace efcml
