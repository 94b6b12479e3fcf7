#include "efcml/consequent.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace efcml;

namespace {

struct BatchInstance {
    MatrixXd regressors;  // N x (p+1)
    MatrixXd labels;      // K x N
    VectorXd weights;     // N
};

BatchInstance random_instance(Index n, Index p, Index k, std::mt19937_64& rng) {
    BatchInstance b;
    b.regressors.resize(n, p + 1);
    b.labels.resize(k, n);
    b.weights.resize(n);
    std::uniform_real_distribution<double> wdist(0.05, 1.0);
    std::uniform_int_distribution<int> coin(0, 1);
    for (Index i = 0; i < n; ++i) {
        b.regressors.row(i) = regressor(test::random_vector(p, rng, 2.0)).transpose();
        for (Index c = 0; c < k; ++c) b.labels(c, i) = coin(rng);
        b.weights(i) = wdist(rng);
    }
    return b;
}

/// Independent evaluation of the smooth objective terms from raw batch data.
double smooth_objective(const BatchInstance& b, const MatrixXd& w, const MatrixXd& a,
                        double beta) {
    const MatrixXd resid = b.labels - w.transpose() * b.regressors.transpose();
    double wls = 0.0;
    for (Index i = 0; i < b.weights.size(); ++i)
        wls += b.weights(i) * resid.col(i).squaredNorm();
    return 0.5 * wls + beta * (a * w.transpose() * w).trace();
}

double full_objective(const BatchInstance& b, const MatrixXd& w, const MatrixXd& a, double alpha,
                      double beta) {
    return smooth_objective(b, w, a, beta) + alpha * w.topRows(w.rows() - 1).cwiseAbs().sum();
}

}  // namespace

TEST_CASE("weighted correlation") {
    VectorXd ones3 = VectorXd::Ones(3);
    VectorXd yc(3), yd(3);
    SUBCASE("self-correlation") {
        yc << 1, 0, 1;
        CHECK(weighted_correlation(yc, yc, ones3) == doctest::Approx(1.0));
    }
    SUBCASE("complement") {
        yc << 1, 0, 1;
        yd << 0, 1, 0;
        CHECK(weighted_correlation(yc, yd, ones3) == doctest::Approx(-1.0));
    }
    SUBCASE("hand evaluation gives zero") {
        VectorXd a(4), b(4);
        a << 1, 1, 0, 0;
        b << 1, 0, 1, 0;
        CHECK(weighted_correlation(a, b, VectorXd::Ones(4)) == doctest::Approx(0.0));
    }
    SUBCASE("degenerate variance yields zero") {
        yc << 1, 1, 1;
        yd << 0, 1, 0;
        CHECK(weighted_correlation(yc, yd, ones3) == 0.0);
    }
}

TEST_CASE("anti-correlation matrix stays in [0,2], symmetric, zero diagonal") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const Index k = 4;
        MatrixXd labels(k, 40);
        for (Index c = 0; c < k; ++c)
            for (Index i = 0; i < 40; ++i) labels(c, i) = coin(rng);
        VectorXd w = VectorXd::Ones(40);
        const MatrixXd a = anti_correlation_batch(labels, w);
        CHECK((a - a.transpose()).norm() == 0.0);
        CHECK(a.minCoeff() >= 0.0);
        CHECK(a.maxCoeff() <= 2.0);
        for (Index c = 0; c < k; ++c) {
            const double var = (labels.row(c).array() - labels.row(c).mean()).square().sum();
            if (var > 1e-12) CHECK(a(c, c) == doctest::Approx(0.0));
        }
    }
}

TEST_CASE("soft threshold") {
    MatrixXd x(1, 1);
    SUBCASE("shrink from above") {
        x << 1.2;
        CHECK(soft_threshold(x, 0.5)(0, 0) == doctest::Approx(0.7));
    }
    SUBCASE("inside the dead zone") {
        x << -0.3;
        CHECK(soft_threshold(x, 0.5)(0, 0) == 0.0);
    }
    SUBCASE("identity at t = 0") {
        std::mt19937_64 rng(9);
        const MatrixXd m = test::random_matrix(4, 3, rng);
        CHECK((soft_threshold(m, 0.0) - m).norm() == 0.0);
    }
    SUBCASE("contraction toward zero") {
        std::mt19937_64 rng(13);
        const MatrixXd m = test::random_matrix(6, 5, rng, 2.0);
        const MatrixXd s = soft_threshold(m, 0.3);
        for (Index i = 0; i < m.rows(); ++i)
            for (Index j = 0; j < m.cols(); ++j) CHECK(std::abs(s(i, j)) <= std::abs(m(i, j)));
    }
}

TEST_CASE("lipschitz constant") {
    SUBCASE("identity hessian") {
        CHECK(lipschitz(MatrixXd::Identity(2, 2), MatrixXd::Zero(1, 1), 0.0) ==
              doctest::Approx(1.0));
    }
    SUBCASE("eigenvalue sum under the root") {
        MatrixXd h = Eigen::Vector2d(4.0, 1.0).asDiagonal();
        MatrixXd a = Eigen::Vector2d(5.0, 0.0).asDiagonal();  // lambda_max(beta*A) = 5
        CHECK(lipschitz(h, a, 1.0) == doctest::Approx(3.0));
    }
    SUBCASE("weight scaling moves the largest eigenvalue linearly") {
        std::mt19937_64 rng(21);
        const MatrixXd h = test::random_spd(4, rng);
        const MatrixXd a = MatrixXd::Zero(2, 2);
        const double l1 = lipschitz(h, a, 0.0);
        const double l4 = lipschitz(4.0 * h, a, 0.0);
        CHECK(l4 == doctest::Approx(2.0 * l1).epsilon(1e-10));
    }
    SUBCASE("non-finite input") {
        MatrixXd h = MatrixXd::Constant(2, 2, std::numeric_limits<double>::quiet_NaN());
        CHECK_THROWS_AS(lipschitz(h, MatrixXd::Zero(1, 1), 0.0), NonFiniteInputError);
    }
}

TEST_CASE("gradient") {
    std::mt19937_64 rng(33);
    const Index p = 3, k = 3, n = 40;
    BatchInstance b = random_instance(n, p, k, rng);
    const MatrixXd h = b.regressors.transpose() * b.weights.asDiagonal() * b.regressors;
    const MatrixXd g = b.regressors.transpose() * b.weights.asDiagonal() * b.labels.transpose();
    const MatrixXd a = anti_correlation_batch(b.labels, b.weights);

    SUBCASE("zero point") {
        const MatrixXd grad = gradient(MatrixXd::Zero(p + 1, k), h, g, a, 0.5);
        CHECK((grad + g).norm() < 1e-12);
    }
    SUBCASE("stationary at the weighted least squares solution when beta = 0") {
        const MatrixXd w = h.ldlt().solve(g);
        CHECK(gradient(w, h, g, a, 0.0).norm() < 1e-8 * g.norm());
    }
    SUBCASE("matches central finite differences") {
        const double beta = 2.5;
        MatrixXd w = test::random_matrix(p + 1, k, rng);
        const MatrixXd grad = gradient(w, h, g, a, beta);
        const double step = 1e-6;
        double max_rel = 0.0;
        for (Index i = 0; i < w.rows(); ++i) {
            for (Index j = 0; j < w.cols(); ++j) {
                MatrixXd hi = w, lo = w;
                hi(i, j) += step;
                lo(i, j) -= step;
                const double fd =
                    (smooth_objective(b, hi, a, beta) - smooth_objective(b, lo, a, beta)) /
                    (2.0 * step);
                max_rel = std::max(max_rel, std::abs(fd - grad(i, j)) /
                                                std::max(1.0, std::abs(fd)));
            }
        }
        CHECK(max_rel < 1e-5);
    }
}

TEST_CASE("batch_fit") {
    std::mt19937_64 rng(41);
    LearnConfig cfg;

    SUBCASE("alpha = beta = 0 matches the ridge-started closed form") {
        for (int trial = 0; trial < 5; ++trial) {
            BatchInstance b = random_instance(60, 4, 3, rng);
            cfg.alpha = 0.0;
            cfg.beta = 0.0;
            const BatchFitResult fit = batch_fit(b.regressors, b.labels, b.weights, cfg);
            const MatrixXd h =
                b.regressors.transpose() * b.weights.asDiagonal() * b.regressors;
            const MatrixXd g =
                b.regressors.transpose() * b.weights.asDiagonal() * b.labels.transpose();
            const MatrixXd w_ref = (h + fit.gamma * MatrixXd::Identity(5, 5)).ldlt().solve(g);
            CHECK((fit.w - w_ref).norm() < 1e-8 * std::max(1.0, w_ref.norm()));
        }
    }
    SUBCASE("huge alpha zeroes every non-intercept coefficient") {
        BatchInstance b = random_instance(50, 3, 2, rng);
        cfg.alpha = 1e6;
        cfg.beta = 0.0;
        const BatchFitResult fit = batch_fit(b.regressors, b.labels, b.weights, cfg);
        CHECK(fit.w.topRows(3).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("objective trace is non-increasing") {
        for (int trial = 0; trial < 5; ++trial) {
            BatchInstance b = random_instance(50, 4, 3, rng);
            cfg.alpha = 0.05;
            cfg.beta = 3.0;
            const BatchFitResult fit = batch_fit(b.regressors, b.labels, b.weights, cfg);
            for (std::size_t t = 1; t < fit.objective_trace.size(); ++t)
                CHECK(fit.objective_trace[t] <= fit.objective_trace[t - 1]);
            // the reported trace is the real objective
            const MatrixXd a = anti_correlation_batch(b.labels, b.weights);
            CHECK(fit.objective_trace.back() ==
                  doctest::Approx(full_objective(b, fit.w, a, cfg.alpha, cfg.beta))
                      .epsilon(1e-8));
        }
    }
    SUBCASE("exactly correlated labels: coupling term vanishes, columns stay equal") {
        // y2 == y1 makes corr = 1 and a12 = 0; the beta term has no force,
        // so both settings land on the same solution.
        const Index n = 50;
        BatchInstance b = random_instance(n, 1, 2, rng);
        b.labels.row(1) = b.labels.row(0);
        cfg.alpha = 0.0;
        cfg.beta = 0.0;
        const MatrixXd w0 = batch_fit(b.regressors, b.labels, b.weights, cfg).w;
        cfg.beta = 10.0;
        const MatrixXd w10 = batch_fit(b.regressors, b.labels, b.weights, cfg).w;
        const double d0 = (w0.col(0) - w0.col(1)).norm();
        const double d10 = (w10.col(0) - w10.col(1)).norm();
        CHECK(d10 <= d0 + 1e-9);
    }
    SUBCASE("uncorrelated labels: beta pushes the columns toward orthogonality") {
        const Index n = 200;
        BatchInstance b = random_instance(n, 2, 2, rng);
        std::uniform_int_distribution<int> coin(0, 1);
        for (Index i = 0; i < n; ++i) {
            b.labels(0, i) = coin(rng);
            b.labels(1, i) = coin(rng);
        }
        cfg.alpha = 0.0;
        cfg.beta = 0.0;
        const MatrixXd w0 = batch_fit(b.regressors, b.labels, b.weights, cfg).w;
        cfg.beta = 5.0;
        const MatrixXd w5 = batch_fit(b.regressors, b.labels, b.weights, cfg).w;
        CHECK(std::abs(w5.col(0).dot(w5.col(1))) < std::abs(w0.col(0).dot(w0.col(1))));
    }
    SUBCASE("convexity witness on the assembled pencil") {
        BatchInstance b = random_instance(80, 3, 3, rng);
        const MatrixXd h = b.regressors.transpose() * b.weights.asDiagonal() * b.regressors;
        const MatrixXd a = anti_correlation_batch(b.labels, b.weights);
        CHECK(convexity_margin(h, a, 1.0) > 0.0);
    }
    SUBCASE("non-finite input is rejected") {
        BatchInstance b = random_instance(10, 2, 2, rng);
        b.regressors(0, 0) = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(batch_fit(b.regressors, b.labels, b.weights, cfg), NonFiniteInputError);
    }
}

TEST_CASE("rfwls") {
    SUBCASE("vanishing weight leaves the parameters almost untouched") {
        Rule r = blank_rule(2, 1, 1, 1000.0);
        r.consequents << 0.5, 0.25;
        const MatrixXd before = r.consequents;
        VectorXd reg(2), y(1);
        reg << 1.0, 1.0;
        y << 1.0;
        rfwls_step(r, reg, y, 1e-300);
        CHECK((r.consequents - before).norm() < 1e-6);
    }
    SUBCASE("two samples recover the line y = x") {
        Rule r = blank_rule(2, 1, 1, 1000.0);
        VectorXd y(1);
        for (double v : {0.0, 1.0}) {
            VectorXd reg(2);
            reg << v, 1.0;
            y << v;
            rfwls_step(r, reg, y, 1.0);
        }
        CHECK(r.consequents(0, 0) == doctest::Approx(1.0).epsilon(1e-2));
        CHECK(std::abs(r.consequents(1, 0)) < 1e-2);
        // against the ridge-started normal equations oracle
        MatrixXd R(2, 2);
        R << 0, 1, 1, 1;
        VectorXd Y(2);
        Y << 0, 1;
        const MatrixXd w_ref =
            (R.transpose() * R + MatrixXd::Identity(2, 2) / 1000.0).ldlt().solve(R.transpose() * Y);
        CHECK((r.consequents - w_ref).norm() < 1e-9);
    }
    SUBCASE("stream of weighted steps matches the batch normal equations") {
        std::mt19937_64 rng(55);
        for (int trial = 0; trial < 5; ++trial) {
            const Index p = 4, k = 3, n = 120;
            BatchInstance b = random_instance(n, p, k, rng);
            Rule r = blank_rule(p + 1, p, k, 1000.0);
            for (Index i = 0; i < n; ++i)
                rfwls_step(r, b.regressors.row(i).transpose(), b.labels.col(i), b.weights(i));
            const MatrixXd h =
                b.regressors.transpose() * b.weights.asDiagonal() * b.regressors;
            const MatrixXd g =
                b.regressors.transpose() * b.weights.asDiagonal() * b.labels.transpose();
            const MatrixXd w_ref =
                (h + MatrixXd::Identity(p + 1, p + 1) / 1000.0).ldlt().solve(g);
            CHECK((r.consequents - w_ref).norm() < 1e-6 * std::max(1.0, w_ref.norm()));
            // P tracks the inverse regularized Hessian
            const MatrixXd p_ref =
                (h + MatrixXd::Identity(p + 1, p + 1) / 1000.0).ldlt().solve(
                    MatrixXd::Identity(p + 1, p + 1));
            CHECK((r.inv_hessian - p_ref).norm() < 1e-6 * p_ref.norm());
        }
    }
}

TEST_CASE("weighted statistics recursions") {
    SUBCASE("first sample contributes zero variance") {
        Rule r = blank_rule(2, 1, 2, 1000.0);
        VectorXd y(2);
        y << 1.0, 0.0;
        update_weighted_stats(r, y, 0.7);
        CHECK(r.wvar_y.norm() == 0.0);
        CHECK(r.weight_sum == doctest::Approx(0.7));
        CHECK((r.wmean_y - y).norm() == 0.0);
    }
    SUBCASE("unit weights, labels 0 then 1 give unnormalized variance 0.5") {
        Rule r = blank_rule(2, 1, 1, 1000.0);
        VectorXd y(1);
        y << 0.0;
        update_weighted_stats(r, y, 1.0);
        y << 1.0;
        update_weighted_stats(r, y, 1.0);
        CHECK(r.wvar_y(0) == doctest::Approx(0.5));
    }
    SUBCASE("incremental equals batch recomputation for random weight sequences") {
        std::mt19937_64 rng(77);
        std::uniform_real_distribution<double> wdist(0.01, 1.0);
        std::uniform_int_distribution<int> coin(0, 1);
        const Index k = 4, n = 150;
        for (int trial = 0; trial < 10; ++trial) {
            Rule r = blank_rule(2, 1, k, 1000.0);
            MatrixXd labels(k, n);
            VectorXd weights(n);
            for (Index i = 0; i < n; ++i) {
                VectorXd y(k);
                for (Index c = 0; c < k; ++c) y(c) = coin(rng);
                weights(i) = wdist(rng);
                labels.col(i) = y;
                update_weighted_stats(r, y, weights(i));
            }
            const double sw = weights.sum();
            const VectorXd mean = labels * weights / sw;
            MatrixXd cov_ref = MatrixXd::Zero(k, k);
            for (Index i = 0; i < n; ++i) {
                const VectorXd dev = labels.col(i) - mean;
                cov_ref += weights(i) * dev * dev.transpose();
            }
            CHECK(std::abs(r.weight_sum - sw) < 1e-10 * sw);
            CHECK((r.wmean_y - mean).norm() < 1e-10);
            CHECK((r.wcov_y - cov_ref).norm() < 1e-10 * cov_ref.norm());
            CHECK((r.wvar_y - cov_ref.diagonal()).norm() < 1e-10 * cov_ref.norm());
        }
    }
}

TEST_CASE("information matrix updates") {
    SUBCASE("outer product increment") {
        Rule r = blank_rule(2, 1, 2, 1000.0);
        VectorXd reg(2), y(2);
        reg << 1.0, 1.0;
        y << 1.0, 0.0;
        update_info_matrix(r, reg, y, 0.5);
        CHECK(r.info(0, 0) == doctest::Approx(0.5));
        CHECK(r.info(1, 0) == doctest::Approx(0.5));
        CHECK(r.info(0, 1) == 0.0);
        CHECK(r.info(1, 1) == 0.0);
    }
    SUBCASE("clamped weight leaves the matrix essentially unchanged") {
        Rule r = blank_rule(2, 1, 1, 1000.0);
        VectorXd reg(2), y(1);
        reg << 3.0, 1.0;
        y << 1.0;
        update_info_matrix(r, reg, y, 1e-300);
        CHECK(r.info.norm() < 1e-290);
    }
    SUBCASE("stream equals batch") {
        std::mt19937_64 rng(101);
        BatchInstance b = random_instance(100, 3, 2, rng);
        Rule r = blank_rule(4, 3, 2, 1000.0);
        for (Index i = 0; i < 100; ++i)
            update_info_matrix(r, b.regressors.row(i).transpose(), b.labels.col(i), b.weights(i));
        const MatrixXd ref =
            b.regressors.transpose() * b.weights.asDiagonal() * b.labels.transpose();
        CHECK((r.info - ref).norm() < 1e-10 * ref.norm());
    }
}

TEST_CASE("incremental step") {
    std::mt19937_64 rng(202);
    const Index p = 3, k = 2;
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_real_distribution<double> wdist(0.2, 1.0);

    SUBCASE("alpha = beta = 0 reduces to the RFWLS step after burn-in") {
        LearnConfig cfg;
        cfg.alpha = 0.0;
        cfg.beta = 0.0;
        Rule r = blank_rule(p + k, p, k, cfg.rls_init);
        for (int i = 0; i < 300; ++i) {
            const VectorXd x = test::random_vector(p, rng);
            VectorXd y(k);
            y << coin(rng), coin(rng);
            incremental_step(r, x, y, wdist(rng), cfg);
        }
        Rule full = r;
        Rule rfwls_only = r;
        const VectorXd x = test::random_vector(p, rng);
        VectorXd y(k);
        y << 1.0, 0.0;
        incremental_step(full, x, y, 0.8, cfg);
        rfwls_step(rfwls_only, regressor(x), y, 0.8);
        CHECK((full.consequents - rfwls_only.consequents).norm() < 1e-9);
    }

    SUBCASE("objective on the accumulated batch is non-increasing over the proximal iterations") {
        LearnConfig cfg;
        cfg.alpha = 0.02;
        cfg.beta = 4.0;
        cfg.hessian_from_p = false;  // exact accumulated Hessian for the cross-check
        Rule r = blank_rule(p + k, p, k, cfg.rls_init);

        std::vector<VectorXd> xs;
        std::vector<VectorXd> ys;
        std::vector<double> ws;
        for (int i = 0; i < 120; ++i) {
            const VectorXd x = test::random_vector(p, rng);
            VectorXd y(k);
            const int v = coin(rng);
            y << v, (wdist(rng) < 0.9 ? v : 1 - v);
            const double psi = wdist(rng);
            cfg.incr_prox_iters = 1;
            incremental_step(r, x, y, psi, cfg);
            xs.push_back(x);
            ys.push_back(y);
            ws.push_back(psi);
        }

        // replay the final sample with 0..5 proximal iterations from the same state
        const VectorXd x = test::random_vector(p, rng);
        VectorXd y(k);
        y << 1.0, 1.0;
        BatchInstance b;
        b.regressors.resize(static_cast<Index>(xs.size()) + 1, p + 1);
        b.labels.resize(k, static_cast<Index>(xs.size()) + 1);
        b.weights.resize(static_cast<Index>(xs.size()) + 1);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            b.regressors.row(static_cast<Index>(i)) = regressor(xs[i]).transpose();
            b.labels.col(static_cast<Index>(i)) = ys[i];
            b.weights(static_cast<Index>(i)) = ws[i];
        }
        b.regressors.row(static_cast<Index>(xs.size())) = regressor(x).transpose();
        b.labels.col(static_cast<Index>(xs.size())) = y;
        b.weights(static_cast<Index>(xs.size())) = 0.6;

        std::vector<double> objective;
        for (int iters = 0; iters <= 5; ++iters) {
            Rule probe = r;
            cfg.incr_prox_iters = iters;
            incremental_step(probe, x, y, 0.6, cfg);
            const MatrixXd a = anti_correlation(probe.wvar_y, probe.wcov_y);
            objective.push_back(full_objective(b, probe.consequents, a, cfg.alpha, cfg.beta));
        }
        for (std::size_t t = 1; t < objective.size(); ++t)
            CHECK(objective[t] <= objective[t - 1] + 1e-10);
    }

    SUBCASE("uncorrelated labels drift toward orthogonal columns under beta") {
        auto run = [&](double beta, std::uint64_t seed) {
            std::mt19937_64 local(seed);
            LearnConfig cfg;
            cfg.alpha = 0.0;
            cfg.beta = beta;
            Rule r = blank_rule(p + k, p, k, cfg.rls_init);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (int i = 0; i < 200; ++i) {
                const VectorXd x = test::random_vector(p, local);
                VectorXd y(k);
                y << (u(local) < 0.5 ? 1.0 : 0.0), (u(local) < 0.5 ? 1.0 : 0.0);
                incremental_step(r, x, y, 1.0, cfg);
            }
            return std::abs(r.consequents.col(0).dot(r.consequents.col(1)));
        };
        CHECK(run(10.0, 7) < run(0.0, 7));
    }
}
