#include "efcml/rulebase.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace efcml {

namespace {

double quad_form(const Rule& r, const VectorXd& z) {
    const Index d = z.size();
    if (d > r.center.size())
        throw DimensionMismatchError("query dimension exceeds rule dimension");
    if (d == r.center.size()) {
        const VectorXd u = z - r.center;
        return u.dot(r.inv_cov * u);
    }
    const VectorXd u = z - r.center.head(d);
    return u.dot(r.inv_cov.topLeftCorner(d, d) * u);
}

}  // namespace

Rule blank_rule(Index cluster_dim, Index input_dim, Index labels, double omega) {
    Rule r;
    r.center = VectorXd::Zero(cluster_dim);
    r.inv_cov = MatrixXd::Identity(cluster_dim, cluster_dim);
    r.cov_diag = VectorXd::Ones(cluster_dim);
    r.support = 1.0;
    r.consequents = MatrixXd::Zero(input_dim + 1, labels);
    r.inv_hessian = omega * MatrixXd::Identity(input_dim + 1, input_dim + 1);
    r.info = MatrixXd::Zero(input_dim + 1, labels);
    r.wmean_y = VectorXd::Zero(labels);
    r.wvar_y = VectorXd::Zero(labels);
    r.wcov_y = MatrixXd::Zero(labels, labels);
    r.weight_sum = 0.0;
    r.yqy = 0.0;
    r.reg_moment = MatrixXd::Zero(input_dim + 1, input_dim + 1);
    r.hessian_prior = 1.0 / omega;
    return r;
}

double activation(const Rule& r, const VectorXd& x) {
    return std::exp(-0.5 * quad_form(r, x));
}

double mahalanobis(const Rule& r, const VectorXd& z) {
    return std::sqrt(std::max(0.0, quad_form(r, z)));
}

VectorXd normalized_activations(const RuleBase& rb, const VectorXd& x) {
    const Index c = rb.rule_count();
    if (c < 1) throw IndexOutOfRangeError("rule base is empty");
    VectorXd mu(c);
    for (Index i = 0; i < c; ++i)
        mu(i) = std::max(activation(rb.rules[static_cast<std::size_t>(i)], x), kActivationFloor);
    return mu / mu.sum();
}

VectorXd predict_continuous(const RuleBase& rb, const VectorXd& x) {
    if (x.size() != rb.p) throw DimensionMismatchError("feature dimension mismatch");
    const VectorXd psi = normalized_activations(rb, x);
    const VectorXd r = regressor(x);
    VectorXd yhat = VectorXd::Zero(rb.k);
    for (Index i = 0; i < rb.rule_count(); ++i)
        yhat += psi(i) * (rb.rules[static_cast<std::size_t>(i)].consequents.transpose() * r);
    return yhat;
}

VectorXi predict_crisp(const VectorXd& yhat) {
    VectorXi out(yhat.size());
    for (Index j = 0; j < yhat.size(); ++j) out(j) = yhat(j) >= 0.5 ? 1 : 0;
    return out;
}

namespace {

using nlohmann::json;

json matrix_to_json(const MatrixXd& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

MatrixXd matrix_from_json(const json& j) {
    const auto nr = static_cast<Index>(j.size());
    if (nr == 0) return MatrixXd(0, 0);
    const auto nc = static_cast<Index>(j.at(0).size());
    MatrixXd m(nr, nc);
    for (Index i = 0; i < nr; ++i)
        for (Index c = 0; c < nc; ++c) m(i, c) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c)).get<double>();
    return m;
}

json vector_to_json(const VectorXd& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

VectorXd vector_from_json(const json& j) {
    VectorXd v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

}  // namespace

nlohmann::json config_to_json(const LearnConfig& c) {
    return nlohmann::json{
        {"alpha", c.alpha},
        {"beta", c.beta},
        {"fac", c.fac},
        {"m", c.m},
        {"eps_fraction", c.eps_fraction},
        {"thresh2", c.thresh2},
        {"thresh3", c.thresh3},
        {"budget", c.budget},
        {"max_prox_iters", c.max_prox_iters},
        {"incr_prox_iters", c.incr_prox_iters},
        {"prox_tol", c.prox_tol},
        {"rls_init", c.rls_init},
        {"merge_kappa", c.merge_kappa},
        {"adapt_eta", c.adapt_eta},
        {"adapt_min", c.adapt_min},
        {"adapt_max", c.adapt_max},
        {"hessian_from_p", c.hessian_from_p},
    };
}

LearnConfig config_from_json(const nlohmann::json& j) {
    LearnConfig c;
    c.alpha = j.value("alpha", c.alpha);
    c.beta = j.value("beta", c.beta);
    c.fac = j.value("fac", c.fac);
    c.m = j.value("m", c.m);
    c.eps_fraction = j.value("eps_fraction", c.eps_fraction);
    c.thresh2 = j.value("thresh2", c.thresh2);
    c.thresh3 = j.value("thresh3", c.thresh3);
    c.budget = j.value("budget", c.budget);
    c.max_prox_iters = j.value("max_prox_iters", c.max_prox_iters);
    c.incr_prox_iters = j.value("incr_prox_iters", c.incr_prox_iters);
    c.prox_tol = j.value("prox_tol", c.prox_tol);
    c.rls_init = j.value("rls_init", c.rls_init);
    c.merge_kappa = j.value("merge_kappa", c.merge_kappa);
    c.adapt_eta = j.value("adapt_eta", c.adapt_eta);
    c.adapt_min = j.value("adapt_min", c.adapt_min);
    c.adapt_max = j.value("adapt_max", c.adapt_max);
    c.hessian_from_p = j.value("hessian_from_p", c.hessian_from_p);
    return c;
}

nlohmann::json rulebase_to_json(const RuleBase& rb) {
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& r : rb.rules) {
        rules.push_back({
            {"center", vector_to_json(r.center)},
            {"inv_cov", matrix_to_json(r.inv_cov)},
            {"cov_diag", vector_to_json(r.cov_diag)},
            {"support", r.support},
            {"consequents", matrix_to_json(r.consequents)},
            {"inv_hessian", matrix_to_json(r.inv_hessian)},
            {"info", matrix_to_json(r.info)},
            {"wmean_y", vector_to_json(r.wmean_y)},
            {"wvar_y", vector_to_json(r.wvar_y)},
            {"wcov_y", matrix_to_json(r.wcov_y)},
            {"weight_sum", r.weight_sum},
            {"yqy", r.yqy},
            {"reg_moment", matrix_to_json(r.reg_moment)},
            {"hessian_prior", r.hessian_prior},
        });
    }
    return nlohmann::json{
        {"schema", "efcml-rulebase"},
        {"version", 1},
        {"p", rb.p},
        {"k", rb.k},
        {"config", config_to_json(rb.config)},
        {"rules", std::move(rules)},
    };
}

RuleBase rulebase_from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "efcml-rulebase" || j.value("version", 0) != 1)
        throw MalformedFileError("not an efcml-rulebase v1 document");
    RuleBase rb;
    rb.p = j.at("p").get<Index>();
    rb.k = j.at("k").get<Index>();
    rb.config = config_from_json(j.at("config"));
    for (const auto& rj : j.at("rules")) {
        Rule r;
        r.center = vector_from_json(rj.at("center"));
        r.inv_cov = matrix_from_json(rj.at("inv_cov"));
        r.cov_diag = vector_from_json(rj.at("cov_diag"));
        r.support = rj.at("support").get<double>();
        r.consequents = matrix_from_json(rj.at("consequents"));
        r.inv_hessian = matrix_from_json(rj.at("inv_hessian"));
        r.info = matrix_from_json(rj.at("info"));
        r.wmean_y = vector_from_json(rj.at("wmean_y"));
        r.wvar_y = vector_from_json(rj.at("wvar_y"));
        r.wcov_y = matrix_from_json(rj.at("wcov_y"));
        r.weight_sum = rj.at("weight_sum").get<double>();
        r.yqy = rj.value("yqy", 0.0);
        r.reg_moment = matrix_from_json(rj.at("reg_moment"));
        r.hessian_prior = rj.value("hessian_prior", 0.0);
        rb.rules.push_back(std::move(r));
    }
    return rb;
}

}  // namespace efcml
