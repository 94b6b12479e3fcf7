#include "efcml/metrics.hpp"

#include "efcml/errors.hpp"
#include "efcml/rulebase.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace efcml {

double ap_contribution(const VectorXd& yhat, const VectorXi& y) {
    const Index k = yhat.size();
    if (y.size() != k) throw DimensionMismatchError("ap_contribution length mismatch");
    std::vector<Index> positives;
    for (Index j = 0; j < k; ++j)
        if (y(j) == 1) positives.push_back(j);
    if (positives.empty()) throw NoPositiveLabelError("sample has no positive label");

    // descending stable sort by value, ties resolved by ascending label index;
    // the same total order drives rank and numerator so exact ties cannot
    // push the score past 1
    std::vector<Index> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return yhat(a) > yhat(b); });
    std::vector<Index> rank(static_cast<std::size_t>(k));
    for (Index pos = 0; pos < k; ++pos)
        rank[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos + 1;

    auto at_or_above = [&](Index other, Index l) {
        return rank[static_cast<std::size_t>(other)] <= rank[static_cast<std::size_t>(l)];
    };
    double sum = 0.0;
    for (Index l : positives) {
        Index count = 0;
        for (Index l2 : positives)
            if (at_or_above(l2, l)) ++count;
        sum += static_cast<double>(count) / static_cast<double>(rank[static_cast<std::size_t>(l)]);
    }
    return sum / static_cast<double>(positives.size());
}

int pa_contribution(const VectorXi& ycrisp, const VectorXi& y) {
    if (ycrisp.size() != y.size()) throw DimensionMismatchError("pa_contribution length mismatch");
    int matches = 0;
    for (Index j = 0; j < y.size(); ++j)
        if (ycrisp(j) == y(j)) ++matches;
    return matches;
}

void update_ap(MetricState& state, double contribution) {
    state.ap = (state.ap * static_cast<double>(state.n_ap) + contribution) /
               static_cast<double>(state.n_ap + 1);
    state.n_ap += 1;
}

void update_pa(MetricState& state, int matches) {
    const double kn = static_cast<double>(state.k) * static_cast<double>(state.n_pa);
    state.pa = (state.pa * kn + static_cast<double>(matches)) /
               (static_cast<double>(state.k) * static_cast<double>(state.n_pa + 1));
    state.n_pa += 1;
}

void update_metrics(MetricState& state, const VectorXd& yhat, const VectorXi& y) {
    if (y.sum() > 0) update_ap(state, ap_contribution(yhat, y));
    update_pa(state, pa_contribution(predict_crisp(yhat), y));
}

}  // namespace efcml
