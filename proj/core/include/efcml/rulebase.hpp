#pragma once

#include "efcml/errors.hpp"
#include "efcml/types.hpp"

#include <nlohmann/json_fwd.hpp>

namespace efcml {

/// Smallest raw activation kept before normalization; keeps Eq-style
/// normalized weights well defined far away from every rule.
inline constexpr double kActivationFloor = 1e-300;

/// One fuzzy rule. Centers and inverse covariances live in the clustered
/// space (product space for the multi-label engine: p features followed by
/// K label coordinates); inference restricts them to the leading p
/// coordinates. Consequents are (p+1) x K with the intercept in the last row.
struct Rule {
    VectorXd center;
    MatrixXd inv_cov;
    VectorXd cov_diag;  // diagonal of the implied covariance, kept in step with inv_cov
    double support = 1.0;

    MatrixXd consequents;   // (p+1) x K
    MatrixXd inv_hessian;   // P, (p+1) x (p+1)
    MatrixXd info;          // R^T Q Y^T, (p+1) x K
    VectorXd wmean_y;       // weighted label means
    VectorXd wvar_y;        // unnormalized weighted variances
    MatrixXd wcov_y;        // unnormalized weighted covariances, K x K
    double weight_sum = 0.0;
    double yqy = 0.0;          // sum psi * |y|^2, for the objective surrogate
    MatrixXd reg_moment;       // sum psi * r r^T
    double hessian_prior = 0.0;  // diagonal prior weight; reg_moment + prior*I = P^-1

    // warm start for the largest-eigenvalue power iteration; not serialized
    VectorXd lip_warm;
};

struct RuleBase {
    std::vector<Rule> rules;
    Index p = 0;  // input dimensionality used for inference
    Index k = 0;  // number of labels
    LearnConfig config;

    Index rule_count() const { return static_cast<Index>(rules.size()); }
};

/// Zero-initialized rule over a cluster_dim-dimensional antecedent space
/// with (input_dim+1) x labels consequents and P = omega * I.
Rule blank_rule(Index cluster_dim, Index input_dim, Index labels, double omega);

/// Rule activation mu_i(x) = exp(-1/2 (x-c)^T Sigma^-1 (x-c)) over the
/// leading x.size() coordinates of the rule.
double activation(const Rule& r, const VectorXd& x);

/// Mahalanobis distance of z from the rule center. z may cover the full
/// stored coordinate space or any leading subspace of it.
double mahalanobis(const Rule& r, const VectorXd& z);

/// Normalized activations Psi over all rules; sums to 1.
VectorXd normalized_activations(const RuleBase& rb, const VectorXd& x);

/// Continuous multi-label output: activation-weighted blend of the rule
/// hyperplanes.
VectorXd predict_continuous(const RuleBase& rb, const VectorXd& x);

/// Crisp thresholding: component j is 1 iff yhat_j >= 0.5.
VectorXi predict_crisp(const VectorXd& yhat);

nlohmann::json rulebase_to_json(const RuleBase& rb);
RuleBase rulebase_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const LearnConfig& cfg);
LearnConfig config_from_json(const nlohmann::json& j);

}  // namespace efcml
