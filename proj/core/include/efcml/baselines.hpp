#pragma once

#include "efcml/engine.hpp"
#include "efcml/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <memory>
#include <string>
#include <vector>

namespace efcml {

/// Common surface the evaluation harness drives: predict first, then update
/// (interleaved test-then-train).
class MultiLabelModel {
public:
    virtual ~MultiLabelModel() = default;

    virtual VectorXd predict(const VectorXd& x) const = 0;
    virtual void update(const VectorXd& x, const VectorXi& y) = 0;
    virtual void update_partial(const VectorXd& x, const VectorXi& y,
                                const std::vector<Index>& annotated) = 0;
    virtual void train_initial(const std::vector<Sample>& batch) = 0;
    virtual Index rule_count() const = 0;
    virtual std::string method_name() const = 0;
    virtual nlohmann::json to_json() const = 0;
    virtual bool is_static() const { return false; }

    /// Rule base driving the sample-selection criteria; null when the
    /// method has no single joint antecedent space.
    virtual const RuleBase* selection_rulebase() const { return nullptr; }
};

/// The multi-output classifier: one joint product-space rule base with
/// correlation-regularized consequent learning.
class EfcmlModel final : public MultiLabelModel {
public:
    EfcmlModel(Index p, Index k, const LearnConfig& cfg);

    VectorXd predict(const VectorXd& x) const override;
    void update(const VectorXd& x, const VectorXi& y) override;
    void update_partial(const VectorXd& x, const VectorXi& y,
                        const std::vector<Index>& annotated) override;
    void train_initial(const std::vector<Sample>& batch) override;
    Index rule_count() const override { return engine_.rulebase().rule_count(); }
    std::string method_name() const override { return "efcml"; }
    nlohmann::json to_json() const override;
    const RuleBase* selection_rulebase() const override { return &engine_.rulebase(); }

    RuleEngine& engine() { return engine_; }
    const RuleEngine& engine() const { return engine_; }

private:
    RuleEngine engine_;
};

/// One-versus-rest: K independent single-output engines, plain RFWLS
/// consequents, each clustering its own (x, y_c) product space.
class OvrModel final : public MultiLabelModel {
public:
    OvrModel(Index p, Index k, const LearnConfig& cfg);

    VectorXd predict(const VectorXd& x) const override;
    void update(const VectorXd& x, const VectorXi& y) override;
    void update_partial(const VectorXd& x, const VectorXi& y,
                        const std::vector<Index>& annotated) override;
    void train_initial(const std::vector<Sample>& batch) override;
    Index rule_count() const override;
    std::string method_name() const override { return "ovr"; }
    nlohmann::json to_json() const override;

    const std::vector<RuleEngine>& members() const { return members_; }

private:
    std::vector<RuleEngine> members_;
};

/// Classifier chaining: link c consumes the features joined with the
/// indicators of labels 1..c-1 (true labels while training, crisp
/// predictions at inference).
class ChainModel final : public MultiLabelModel {
public:
    ChainModel(Index p, Index k, const LearnConfig& cfg, std::vector<Index> order = {});

    VectorXd predict(const VectorXd& x) const override;
    void update(const VectorXd& x, const VectorXi& y) override;
    void update_partial(const VectorXd& x, const VectorXi& y,
                        const std::vector<Index>& annotated) override;
    void train_initial(const std::vector<Sample>& batch) override;
    Index rule_count() const override;
    std::string method_name() const override { return "chain"; }
    nlohmann::json to_json() const override;

    const std::vector<RuleEngine>& links() const { return links_; }

private:
    Index p_;
    std::vector<Index> order_;  // order_[c] = label handled by link c
    std::vector<RuleEngine> links_;
};

/// Prediction-only wrapper: updates become no-ops after initial training.
class StaticModel final : public MultiLabelModel {
public:
    explicit StaticModel(std::unique_ptr<MultiLabelModel> inner) : inner_(std::move(inner)) {}

    VectorXd predict(const VectorXd& x) const override { return inner_->predict(x); }
    void update(const VectorXd&, const VectorXi&) override {}
    void update_partial(const VectorXd&, const VectorXi&, const std::vector<Index>&) override {}
    void train_initial(const std::vector<Sample>& batch) override { inner_->train_initial(batch); }
    Index rule_count() const override { return inner_->rule_count(); }
    std::string method_name() const override { return "static-" + inner_->method_name(); }
    nlohmann::json to_json() const override;
    bool is_static() const override { return true; }
    const RuleBase* selection_rulebase() const override { return inner_->selection_rulebase(); }

private:
    std::unique_ptr<MultiLabelModel> inner_;
};

/// Freeze a trained model; idempotent.
std::unique_ptr<MultiLabelModel> freeze(std::unique_ptr<MultiLabelModel> model);

/// Factory over the method names used by the harness
/// (efcml | ovr | chain | static-efcml | static-ovr | static-chain).
std::unique_ptr<MultiLabelModel> make_model(const std::string& method, Index p, Index k,
                                            const LearnConfig& cfg);

}  // namespace efcml
