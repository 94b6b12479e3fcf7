#include "efcml/engine.hpp"

#include <Eigen/Cholesky>

#include <nlohmann/json.hpp>

namespace efcml {

RuleEngine::RuleEngine(Index input_dim, Index labels, LearnConfig cfg, bool use_ilc)
    : stats_(input_dim + labels), use_ilc_(use_ilc) {
    rb_.p = input_dim;
    rb_.k = labels;
    rb_.config = cfg;
}

EvolutionOutcome RuleEngine::step(const VectorXd& x, const VectorXd& y,
                                  const std::vector<Index>* mask) {
    if (x.size() != rb_.p || y.size() != rb_.k)
        throw DimensionMismatchError("engine sample dimension mismatch");

    VectorXd z(rb_.p + rb_.k);
    z.head(rb_.p) = x;
    z.tail(rb_.k) = y;
    stats_.update(z);

    EvolutionOutcome out;
    if (rb_.rules.empty()) {
        evolve_rule(rb_, x, y, stats_);
        out.kind = EvolutionOutcome::Kind::Evolved;
        out.index = 0;
        out.threshold = tolerance_radius(rb_.config.fac, z.size(), 1.0, rb_.config.m);
        return out;
    }

    const EvolutionCheck chk = evolution_check(rb_, z);
    out.min_distance = chk.ma_win;
    out.threshold = chk.r_win;
    if (chk.fires) {
        evolve_rule(rb_, x, y, stats_);
        out.kind = EvolutionOutcome::Kind::Evolved;
        out.index = rb_.rule_count() - 1;
        // consequent updates resume with the next sample
    } else {
        update_winner(rb_, chk.win, z, stats_);
        out.kind = EvolutionOutcome::Kind::Updated;
        out.index = chk.win;
        const VectorXd psi = normalized_activations(rb_, x);
        for (Index i = 0; i < rb_.rule_count(); ++i) {
            Rule& rule = rb_.rules[static_cast<std::size_t>(i)];
            if (use_ilc_) {
                incremental_step(rule, x, y, psi(i), rb_.config, mask);
            } else {
                rfwls_step(rule, regressor(x), y, psi(i), mask);
            }
        }
    }

    if (auto pair = merge_check(rb_, out.kind == EvolutionOutcome::Kind::Evolved
                                         ? rb_.rule_count() - 1
                                         : out.index)) {
        merge_rules(rb_, pair->first, pair->second);
        out.kind = EvolutionOutcome::Kind::Merged;
        out.index = pair->first - (pair->second < pair->first ? 1 : 0);
        out.removed = pair->second;
    }
    return out;
}

EvolutionOutcome RuleEngine::update(const VectorXd& x, const VectorXd& y) {
    return step(x, y, nullptr);
}

EvolutionOutcome RuleEngine::update_partial(const VectorXd& x, const VectorXd& y,
                                            const std::vector<Index>& annotated) {
    VectorXd filled(rb_.k);
    if (rb_.rules.empty()) {
        filled.setZero();
    } else {
        const VectorXi crisp = predict_crisp(predict(x));
        for (Index c = 0; c < rb_.k; ++c) filled(c) = crisp(c);
    }
    for (Index c : annotated) {
        if (c < 0 || c >= rb_.k) throw IndexOutOfRangeError("annotated label out of range");
        filled(c) = y(c);
    }
    return step(x, filled, &annotated);
}

void RuleEngine::fit_batch_consequents(const std::vector<Sample>& batch) {
    const Index n = static_cast<Index>(batch.size());
    MatrixXd regressors(n, rb_.p + 1);
    MatrixXd labels(rb_.k, n);
    for (Index i = 0; i < n; ++i) {
        regressors.row(i) = regressor(batch[static_cast<std::size_t>(i)].x).transpose();
        labels.col(i) = batch[static_cast<std::size_t>(i)].y.cast<double>();
    }

    LearnConfig fit_cfg = rb_.config;
    if (!use_ilc_) {
        fit_cfg.alpha = 0.0;
        fit_cfg.beta = 0.0;
        fit_cfg.max_prox_iters = 0;  // ridge WLS start is the solution
    }

    MatrixXd psi(n, rb_.rule_count());
    for (Index i = 0; i < n; ++i)
        psi.row(i) = normalized_activations(rb_, batch[static_cast<std::size_t>(i)].x).transpose();

    for (Index ri = 0; ri < rb_.rule_count(); ++ri) {
        Rule& rule = rb_.rules[static_cast<std::size_t>(ri)];
        const VectorXd q = psi.col(ri);
        BatchFitResult fit = batch_fit(regressors, labels, q, fit_cfg);
        rule.consequents = fit.w;
        rule.info = fit.info;
        rule.yqy = fit.yqy;
        rule.reg_moment = fit.hessian;
        rule.hessian_prior = fit.gamma;
        Eigen::LDLT<MatrixXd> ldlt(fit.hessian +
                                   fit.gamma * MatrixXd::Identity(rb_.p + 1, rb_.p + 1));
        rule.inv_hessian = ldlt.solve(MatrixXd::Identity(rb_.p + 1, rb_.p + 1));
        rule.inv_hessian = 0.5 * (rule.inv_hessian + rule.inv_hessian.transpose()).eval();

        const double sw = q.sum();
        rule.weight_sum = sw;
        rule.wmean_y = labels * q / sw;
        rule.wvar_y.setZero();
        rule.wcov_y.setZero();
        for (Index i = 0; i < n; ++i) {
            const VectorXd dev = labels.col(i) - rule.wmean_y;
            rule.wvar_y += q(i) * dev.cwiseProduct(dev);
            rule.wcov_y += q(i) * dev * dev.transpose();
        }
        rule.lip_warm.resize(0);
    }
}

void RuleEngine::train_initial(const std::vector<Sample>& batch) {
    if (batch.empty()) throw EmptyDatasetError("initial batch is empty");
    for (const auto& s : batch) {
        if (s.x.size() != rb_.p || s.y.size() != rb_.k)
            throw DimensionMismatchError("batch sample dimension mismatch");
        VectorXd z(rb_.p + rb_.k);
        z.head(rb_.p) = s.x;
        z.tail(rb_.k) = s.y.cast<double>();
        stats_.update(z);
        Index changed = 0;
        if (rb_.rules.empty()) {
            evolve_rule(rb_, s.x, s.y.cast<double>(), stats_);
        } else {
            const EvolutionCheck chk = evolution_check(rb_, z);
            if (chk.fires) {
                evolve_rule(rb_, s.x, s.y.cast<double>(), stats_);
                changed = rb_.rule_count() - 1;
            } else {
                update_winner(rb_, chk.win, z, stats_);
                changed = chk.win;
            }
        }
        if (auto pair = merge_check(rb_, changed)) merge_rules(rb_, pair->first, pair->second);
    }
    fit_batch_consequents(batch);
}

nlohmann::json RuleEngine::to_json() const {
    nlohmann::json stats{
        {"n", stats_.n},
        {"min", std::vector<double>(stats_.minv.data(), stats_.minv.data() + stats_.minv.size())},
        {"max", std::vector<double>(stats_.maxv.data(), stats_.maxv.data() + stats_.maxv.size())},
        {"mean", std::vector<double>(stats_.mean.data(), stats_.mean.data() + stats_.mean.size())},
        {"m2", std::vector<double>(stats_.m2.data(), stats_.m2.data() + stats_.m2.size())},
    };
    return nlohmann::json{
        {"rulebase", rulebase_to_json(rb_)},
        {"stream_stats", std::move(stats)},
        {"use_ilc", use_ilc_},
    };
}

RuleEngine RuleEngine::from_json(const nlohmann::json& j) {
    RuleBase rb = rulebase_from_json(j.at("rulebase"));
    RuleEngine eng(rb.p, rb.k, rb.config, j.value("use_ilc", true));
    eng.rb_ = std::move(rb);
    const auto& sj = j.at("stream_stats");
    auto vec = [](const nlohmann::json& a) {
        VectorXd v(static_cast<Index>(a.size()));
        for (Index i = 0; i < v.size(); ++i) v(i) = a.at(static_cast<std::size_t>(i)).get<double>();
        return v;
    };
    eng.stats_.n = sj.at("n").get<double>();
    eng.stats_.minv = vec(sj.at("min"));
    eng.stats_.maxv = vec(sj.at("max"));
    eng.stats_.mean = vec(sj.at("mean"));
    eng.stats_.m2 = vec(sj.at("m2"));
    return eng;
}

}  // namespace efcml
