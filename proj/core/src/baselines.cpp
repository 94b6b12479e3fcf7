#include "efcml/baselines.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <numeric>

namespace efcml {

// ---------------------------------------------------------------- EfcmlModel

EfcmlModel::EfcmlModel(Index p, Index k, const LearnConfig& cfg)
    : engine_(p, k, cfg, /*use_ilc=*/true) {}

VectorXd EfcmlModel::predict(const VectorXd& x) const { return engine_.predict(x); }

void EfcmlModel::update(const VectorXd& x, const VectorXi& y) {
    engine_.update(x, y.cast<double>());
}

void EfcmlModel::update_partial(const VectorXd& x, const VectorXi& y,
                                const std::vector<Index>& annotated) {
    engine_.update_partial(x, y.cast<double>(), annotated);
}

void EfcmlModel::train_initial(const std::vector<Sample>& batch) {
    engine_.train_initial(batch);
}

nlohmann::json EfcmlModel::to_json() const {
    return nlohmann::json{{"schema", "efcml-model"},
                          {"version", 1},
                          {"method", method_name()},
                          {"engine", engine_.to_json()}};
}

// ------------------------------------------------------------------ OvrModel

OvrModel::OvrModel(Index p, Index k, const LearnConfig& cfg) {
    LearnConfig member_cfg = cfg;
    member_cfg.alpha = 0.0;
    member_cfg.beta = 0.0;
    members_.reserve(static_cast<std::size_t>(k));
    for (Index c = 0; c < k; ++c) members_.emplace_back(p, 1, member_cfg, /*use_ilc=*/false);
}

VectorXd OvrModel::predict(const VectorXd& x) const {
    VectorXd yhat(static_cast<Index>(members_.size()));
    for (std::size_t c = 0; c < members_.size(); ++c) yhat(static_cast<Index>(c)) = members_[c].predict(x)(0);
    return yhat;
}

void OvrModel::update(const VectorXd& x, const VectorXi& y) {
    for (std::size_t c = 0; c < members_.size(); ++c) {
        VectorXd yc(1);
        yc(0) = y(static_cast<Index>(c));
        members_[c].update(x, yc);
    }
}

void OvrModel::update_partial(const VectorXd& x, const VectorXi& y,
                              const std::vector<Index>& annotated) {
    for (Index c : annotated) {
        VectorXd yc(1);
        yc(0) = y(c);
        members_[static_cast<std::size_t>(c)].update(x, yc);
    }
}

void OvrModel::train_initial(const std::vector<Sample>& batch) {
    for (std::size_t c = 0; c < members_.size(); ++c) {
        std::vector<Sample> member_batch = batch;
        for (auto& s : member_batch) {
            VectorXi yc(1);
            yc(0) = s.y(static_cast<Index>(c));
            s.y = yc;
        }
        members_[c].train_initial(member_batch);
    }
}

Index OvrModel::rule_count() const {
    Index total = 0;
    for (const auto& m : members_) total += m.rulebase().rule_count();
    return total;
}

nlohmann::json OvrModel::to_json() const {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : members_) members.push_back(m.to_json());
    return nlohmann::json{{"schema", "efcml-model"},
                          {"version", 1},
                          {"method", method_name()},
                          {"members", std::move(members)}};
}

// ---------------------------------------------------------------- ChainModel

ChainModel::ChainModel(Index p, Index k, const LearnConfig& cfg, std::vector<Index> order)
    : p_(p), order_(std::move(order)) {
    if (order_.empty()) {
        order_.resize(static_cast<std::size_t>(k));
        std::iota(order_.begin(), order_.end(), Index{0});
    }
    if (static_cast<Index>(order_.size()) != k)
        throw DimensionMismatchError("chain order must list every label once");
    LearnConfig link_cfg = cfg;
    link_cfg.alpha = 0.0;
    link_cfg.beta = 0.0;
    links_.reserve(static_cast<std::size_t>(k));
    for (Index c = 0; c < k; ++c) links_.emplace_back(p + c, 1, link_cfg, /*use_ilc=*/false);
}

VectorXd ChainModel::predict(const VectorXd& x) const {
    const Index k = static_cast<Index>(links_.size());
    VectorXd yhat(k);
    VectorXd aug(p_ + k);
    aug.head(p_) = x;
    for (Index c = 0; c < k; ++c) {
        const double out = links_[static_cast<std::size_t>(c)].predict(aug.head(p_ + c))(0);
        yhat(order_[static_cast<std::size_t>(c)]) = out;
        aug(p_ + c) = out >= 0.5 ? 1.0 : 0.0;  // crisp chaining at inference
    }
    return yhat;
}

void ChainModel::update(const VectorXd& x, const VectorXi& y) {
    const Index k = static_cast<Index>(links_.size());
    VectorXd aug(p_ + k);
    aug.head(p_) = x;
    for (Index c = 0; c < k; ++c) {
        VectorXd yc(1);
        yc(0) = y(order_[static_cast<std::size_t>(c)]);
        links_[static_cast<std::size_t>(c)].update(aug.head(p_ + c), yc);
        aug(p_ + c) = yc(0);  // teacher forcing
    }
}

void ChainModel::update_partial(const VectorXd& x, const VectorXi& y,
                                const std::vector<Index>& annotated) {
    const Index k = static_cast<Index>(links_.size());
    const VectorXd yhat = predict(x);
    VectorXd aug(p_ + k);
    aug.head(p_) = x;
    for (Index c = 0; c < k; ++c) {
        const Index label = order_[static_cast<std::size_t>(c)];
        const bool has_label =
            std::find(annotated.begin(), annotated.end(), label) != annotated.end();
        if (has_label) {
            VectorXd yc(1);
            yc(0) = y(label);
            links_[static_cast<std::size_t>(c)].update(aug.head(p_ + c), yc);
            aug(p_ + c) = yc(0);
        } else {
            aug(p_ + c) = yhat(label) >= 0.5 ? 1.0 : 0.0;
        }
    }
}

void ChainModel::train_initial(const std::vector<Sample>& batch) {
    const Index k = static_cast<Index>(links_.size());
    for (Index c = 0; c < k; ++c) {
        std::vector<Sample> link_batch;
        link_batch.reserve(batch.size());
        for (const auto& s : batch) {
            Sample ls;
            ls.id = s.id;
            ls.x.resize(p_ + c);
            ls.x.head(p_) = s.x;
            for (Index j = 0; j < c; ++j) ls.x(p_ + j) = s.y(order_[static_cast<std::size_t>(j)]);
            ls.y.resize(1);
            ls.y(0) = s.y(order_[static_cast<std::size_t>(c)]);
            link_batch.push_back(std::move(ls));
        }
        links_[static_cast<std::size_t>(c)].train_initial(link_batch);
    }
}

Index ChainModel::rule_count() const {
    Index total = 0;
    for (const auto& l : links_) total += l.rulebase().rule_count();
    return total;
}

nlohmann::json ChainModel::to_json() const {
    nlohmann::json links = nlohmann::json::array();
    for (const auto& l : links_) links.push_back(l.to_json());
    return nlohmann::json{{"schema", "efcml-model"},
                          {"version", 1},
                          {"method", method_name()},
                          {"order", order_},
                          {"links", std::move(links)}};
}

// --------------------------------------------------------------- StaticModel

nlohmann::json StaticModel::to_json() const {
    nlohmann::json inner = inner_->to_json();
    inner["method"] = method_name();
    return inner;
}

std::unique_ptr<MultiLabelModel> freeze(std::unique_ptr<MultiLabelModel> model) {
    if (model->is_static()) return model;
    return std::make_unique<StaticModel>(std::move(model));
}

std::unique_ptr<MultiLabelModel> make_model(const std::string& method, Index p, Index k,
                                            const LearnConfig& cfg) {
    if (method.rfind("static-", 0) == 0)
        return freeze(make_model(method.substr(7), p, k, cfg));
    if (method == "efcml") return std::make_unique<EfcmlModel>(p, k, cfg);
    if (method == "ovr") return std::make_unique<OvrModel>(p, k, cfg);
    if (method == "chain") return std::make_unique<ChainModel>(p, k, cfg);
    throw Error("unknown method: " + method);
}

}  // namespace efcml
