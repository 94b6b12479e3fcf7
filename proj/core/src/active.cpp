#include "efcml/active.hpp"

#include "efcml/antecedent.hpp"

#include <algorithm>
#include <cmath>

namespace efcml {

bool novelty_criterion(const RuleBase& rb, const VectorXd& x) {
    if (rb.rules.empty()) return true;
    if (x.size() != rb.p) throw DimensionMismatchError("novelty dimension mismatch");
    double ma_win = std::numeric_limits<double>::infinity();
    Index win = 0;
    for (Index i = 0; i < rb.rule_count(); ++i) {
        const double ma = mahalanobis(rb.rules[static_cast<std::size_t>(i)], x);
        if (ma < ma_win) {
            ma_win = ma;
            win = i;
        }
    }
    const double r_win = tolerance_radius(rb.config.fac, rb.p,
                                          rb.rules[static_cast<std::size_t>(win)].support,
                                          rb.config.m);
    return ma_win > r_win;
}

std::vector<Index> output_uncertainty(const VectorXd& yhat, double thresh2, double s) {
    const double b = std::clamp(0.5 + (thresh2 - 0.5) * s, std::nextafter(0.5, 1.0), 1.0);
    std::vector<Index> out;
    for (Index j = 0; j < yhat.size(); ++j)
        if (yhat(j) < b && yhat(j) > 1.0 - b) out.push_back(j);
    return out;
}

bool param_instability(const RuleBase& rb, const VectorXd& x, double thresh3, double s) {
    if (rb.rules.empty()) return false;
    const VectorXd psi = normalized_activations(rb, x);
    const VectorXd r = regressor(x);
    double max_drop = 0.0;
    for (Index i = 0; i < rb.rule_count(); ++i) {
        const Rule& rule = rb.rules[static_cast<std::size_t>(i)];
        // trace drop of (I - gain r^T) P without materializing the update
        const VectorXd pr = rule.inv_hessian * r;
        const double denom = 1.0 / std::max(psi(i), kActivationFloor) + r.dot(pr);
        const double drop = pr.squaredNorm() / denom;
        const double tr = rule.inv_hessian.trace();
        if (tr > 0.0) max_drop = std::max(max_drop, drop / tr);
    }
    return max_drop > thresh3 / s;
}

bool gate(const BudgetState& budget, std::int64_t decision_cost, std::int64_t unit) {
    if (decision_cost < 1) throw IndexOutOfRangeError("decision cost must be positive");
    const double projected = static_cast<double>(budget.selected_units + decision_cost) /
                             static_cast<double>(budget.seen_units + unit);
    return projected <= budget.budget;
}

void adapt_thresholds(BudgetState& budget, bool selected, const LearnConfig& cfg) {
    budget.s *= selected ? 1.0 - cfg.adapt_eta : 1.0 + cfg.adapt_eta;
    budget.s = std::clamp(budget.s, cfg.adapt_min, cfg.adapt_max);
}

SelectionDecision select(const RuleBase& rb, const VectorXd& x, BudgetState& budget) {
    const LearnConfig& cfg = rb.config;
    const std::int64_t unit = budget.mode == BudgetMode::LabelsBased ? rb.k : 1;

    SelectionDecision d;
    std::vector<Index> uncertain;
    if (novelty_criterion(rb, x)) {
        d.triggers |= static_cast<unsigned>(Trigger::Novelty);
        d.verdict = SelectionDecision::Verdict::Full;
    } else if (!(uncertain = output_uncertainty(predict_continuous(rb, x), cfg.thresh2, budget.s))
                    .empty()) {
        d.triggers |= static_cast<unsigned>(Trigger::OutputUncertainty);
        d.verdict = budget.mode == BudgetMode::LabelsBased ? SelectionDecision::Verdict::Partial
                                                           : SelectionDecision::Verdict::Full;
    } else if (param_instability(rb, x, cfg.thresh3, budget.s)) {
        d.triggers |= static_cast<unsigned>(Trigger::ParamInstability);
        d.verdict = SelectionDecision::Verdict::Full;
    }

    std::int64_t cost = 0;
    if (d.verdict == SelectionDecision::Verdict::Partial) {
        d.labels = uncertain;
        cost = static_cast<std::int64_t>(uncertain.size());
    } else if (d.verdict == SelectionDecision::Verdict::Full) {
        d.labels.resize(static_cast<std::size_t>(rb.k));
        for (Index c = 0; c < rb.k; ++c) d.labels[static_cast<std::size_t>(c)] = c;
        cost = unit;  // 1 sample, or all K labels
    }

    bool accepted = false;
    if (d.verdict != SelectionDecision::Verdict::None) {
        d.spend_after = static_cast<double>(budget.selected_units + cost) /
                        static_cast<double>(budget.seen_units + unit);
        if (gate(budget, cost, unit)) {
            accepted = true;
        } else {
            d.verdict = SelectionDecision::Verdict::None;
            d.labels.clear();
        }
    }

    budget.seen_samples += 1;
    budget.seen_units += unit;
    if (accepted) budget.selected_units += cost;
    adapt_thresholds(budget, accepted, cfg);
    if (!accepted) d.spend_after = budget.spend_fraction();
    return d;
}

}  // namespace efcml
