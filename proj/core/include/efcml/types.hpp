#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace efcml {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

/// One stream instance: feature vector plus binary label-indicator vector.
struct Sample {
    VectorXd x;       // p raw-scale features, all finite
    VectorXi y;       // K indicators, each 0 or 1
    std::int64_t id;  // ordinal position in source
};

struct Range {
    double lo;
    double hi;
};

struct Dataset {
    std::vector<Sample> samples;
    Index p = 0;
    Index k = 0;
    std::vector<Range> feature_ranges;
    std::vector<std::string> label_names;

    Index size() const { return static_cast<Index>(samples.size()); }
};

struct StreamSplit {
    Dataset initial_batch;
    Dataset stream;
    double split_fraction;
};

/// All learning knobs shared across modules. Defaults follow the method's
/// stated choices; everything is overridable from the CLI / grid search.
struct LearnConfig {
    double alpha = 0.0;          // Lasso weight
    double beta = 0.0;           // correlation weight
    double fac = 0.5;            // vigilance factor of the evolution criterion
    int m = 4;                   // tolerance exponent
    double eps_fraction = 0.2;   // fraction of coordinate range for newborn widths
    double thresh2 = 0.6;        // output-uncertainty bound
    double thresh3 = 0.075;      // trace-downtrend bound
    double budget = 1.0;         // selection budget in (0,1]
    int max_prox_iters = 50;     // batch proximal iterations
    int incr_prox_iters = 1;     // proximal iterations per incremental step
    double prox_tol = 1e-8;      // Frobenius stopping tolerance

    double rls_init = 1000.0;    // omega: newborn P = omega * I
    double merge_kappa = 0.3;    // mutual-overlap bound, in units of d^(1/sqrt(2))
    double adapt_eta = 0.01;     // threshold adaptation rate
    double adapt_min = 0.2;      // clamp for the adaptation factor s
    double adapt_max = 2.0;
    bool hessian_from_p = true;  // refresh RtQR as P^-1; false: zero-mean moment variant
};

inline VectorXd regressor(const VectorXd& x) {
    VectorXd r(x.size() + 1);
    r.head(x.size()) = x;
    r(x.size()) = 1.0;  // intercept last
    return r;
}

}  // namespace efcml
