#pragma once

#include "efcml/antecedent.hpp"
#include "efcml/consequent.hpp"
#include "efcml/rulebase.hpp"
#include "efcml/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <vector>

namespace efcml {

/// Evolving rule engine over one clustered space: antecedent evolution,
/// merging, and per-rule consequent updates. Used directly by the
/// multi-label classifier and as the member engine of the baselines
/// (which run it with plain recursive least squares consequents).
class RuleEngine {
public:
    RuleEngine(Index input_dim, Index labels, LearnConfig cfg, bool use_ilc);

    /// Cluster the batch sample-wise, then fit all rule consequents on the
    /// batch (proximal solver when ILC is on, ridge WLS otherwise).
    void train_initial(const std::vector<Sample>& batch);

    /// Full-label single-pass update.
    EvolutionOutcome update(const VectorXd& x, const VectorXd& y);

    /// Partial-label update: unannotated product-space coordinates are
    /// filled with the model's own crisp predictions; consequent updates
    /// touch only the annotated label columns.
    EvolutionOutcome update_partial(const VectorXd& x, const VectorXd& y,
                                    const std::vector<Index>& annotated);

    VectorXd predict(const VectorXd& x) const { return predict_continuous(rb_, x); }

    Index input_dim() const { return rb_.p; }
    Index labels() const { return rb_.k; }
    const RuleBase& rulebase() const { return rb_; }
    RuleBase& rulebase() { return rb_; }
    const StreamStats& stats() const { return stats_; }

    nlohmann::json to_json() const;
    static RuleEngine from_json(const nlohmann::json& j);

private:
    EvolutionOutcome step(const VectorXd& x, const VectorXd& y,
                          const std::vector<Index>* mask);
    void fit_batch_consequents(const std::vector<Sample>& batch);

    RuleBase rb_;
    StreamStats stats_;
    bool use_ilc_;
};

}  // namespace efcml
