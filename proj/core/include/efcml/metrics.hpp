#pragma once

#include "efcml/types.hpp"

namespace efcml {

/// Accumulated average precision and partial accuracy. AP skips all-negative
/// samples (its ranking score is undefined there), so it keeps its own
/// sample counter; PA counts every sample.
struct MetricState {
    double ap = 0.0;
    double pa = 0.0;
    std::int64_t n_ap = 0;
    std::int64_t n_pa = 0;
    Index k = 0;
};

/// Ranking score of one sample: mean over true labels of the fraction of
/// true labels ranked at or above them in the descending continuous output.
double ap_contribution(const VectorXd& yhat, const VectorXi& y);

/// Number of label positions predicted correctly.
int pa_contribution(const VectorXi& ycrisp, const VectorXi& y);

void update_ap(MetricState& state, double contribution);
void update_pa(MetricState& state, int matches);

/// Convenience: feed one sample's prediction into both accumulators.
void update_metrics(MetricState& state, const VectorXd& yhat, const VectorXi& y);

}  // namespace efcml
