#include "efcml/baselines.hpp"

#include "efcml/ingest.hpp"
#include "efcml/metrics.hpp"
#include "efcml/synthetic.hpp"
#include "helpers.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <random>

using namespace efcml;

namespace {

Dataset single_label_stream(Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Dataset d;
    d.p = 2;
    d.k = 1;
    for (Index i = 0; i < n; ++i) {
        const int cls = u(rng) < 0.5 ? 0 : 1;
        Sample s;
        s.id = i;
        s.x.resize(2);
        s.x << (cls ? 2.5 : -2.5) + g(rng), g(rng);
        s.y.resize(1);
        s.y << cls;
        d.samples.push_back(std::move(s));
    }
    return d;
}

}  // namespace

TEST_CASE("ovr with K=1 equals efcml with alpha=beta=0 on the same stream") {
    const Dataset d = single_label_stream(300, 21);
    LearnConfig cfg;
    cfg.alpha = 0.0;
    cfg.beta = 0.0;
    OvrModel ovr(2, 1, cfg);
    EfcmlModel efc(2, 1, cfg);
    std::vector<Sample> batch(d.samples.begin(), d.samples.begin() + 60);
    ovr.train_initial(batch);
    efc.train_initial(batch);
    for (Index i = 60; i < d.size(); ++i) {
        const Sample& s = d.samples[static_cast<std::size_t>(i)];
        CHECK(std::abs(ovr.predict(s.x)(0) - efc.predict(s.x)(0)) < 1e-9);
        ovr.update(s.x, s.y);
        efc.update(s.x, s.y);
    }
    CHECK(ovr.rule_count() == efc.rule_count());
}

TEST_CASE("ovr members evolve independently") {
    // one label clustered tightly, the other spread across several regions
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 0.3);
    Dataset d;
    d.p = 2;
    d.k = 2;
    for (Index i = 0; i < 240; ++i) {
        Sample s;
        s.id = i;
        s.x.resize(2);
        const int region = static_cast<int>(i) % 4;
        s.x << region * 6.0 + g(rng), (region % 2) * 6.0 + g(rng);
        s.y.resize(2);
        s.y << (region == 0 ? 1 : 0), (region % 2);
        d.samples.push_back(std::move(s));
    }
    LearnConfig cfg;
    cfg.fac = 0.4;
    OvrModel m(2, 2, cfg);
    std::vector<Sample> batch(d.samples.begin(), d.samples.begin() + 80);
    m.train_initial(batch);
    for (Index i = 80; i < d.size(); ++i) m.update(d.samples[static_cast<std::size_t>(i)].x, d.samples[static_cast<std::size_t>(i)].y);
    // per-label product spaces differ, so the rule structures may diverge;
    // at minimum every member carries at least one rule and the sum matches
    Index total = 0;
    for (const auto& member : m.members()) {
        CHECK(member.rulebase().rule_count() >= 1);
        total += member.rulebase().rule_count();
    }
    CHECK(total == m.rule_count());
}

TEST_CASE("ovr predictions are order-independent and all-positive when members say so") {
    LearnConfig cfg;
    OvrModel m(1, 3, cfg);
    Dataset d;
    d.p = 1;
    d.k = 3;
    for (Index i = 0; i < 30; ++i) {
        Sample s;
        s.id = i;
        s.x = VectorXd::Constant(1, static_cast<double>(i % 5));
        s.y = VectorXi::Ones(3);
        d.samples.push_back(s);
    }
    m.train_initial(d.samples);
    const VectorXd yhat = m.predict(VectorXd::Constant(1, 2.0));
    const VectorXi crisp = predict_crisp(yhat);
    for (Index c = 0; c < 3; ++c) CHECK(crisp(c) == 1);
}

TEST_CASE("chain dimensions and teacher forcing") {
    LearnConfig cfg;
    ChainModel chain(4, 3, cfg);
    SUBCASE("link input sizes grow by one") {
        CHECK(chain.links()[0].input_dim() == 4);
        CHECK(chain.links()[1].input_dim() == 5);
        CHECK(chain.links()[2].input_dim() == 6);
        // regressor length = p + c + 1 including the intercept
        CHECK(regressor(VectorXd::Zero(chain.links()[2].input_dim())).size() == 7);
    }
}

TEST_CASE("chain: duplicated label gives the second link a copy of its target") {
    // y2 == y1, noiseless: link 2 sees its own target among the inputs and
    // attains a near-zero training residual
    std::mt19937_64 rng(41);
    std::normal_distribution<double> g(0.0, 1.0);
    Dataset d;
    d.p = 2;
    d.k = 2;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Index i = 0; i < 400; ++i) {
        const int cls = u(rng) < 0.5 ? 0 : 1;
        Sample s;
        s.id = i;
        s.x.resize(2);
        s.x << (cls ? 2.0 : -2.0) + g(rng), g(rng);
        s.y.resize(2);
        s.y << cls, cls;
        d.samples.push_back(std::move(s));
    }
    LearnConfig cfg;
    ChainModel chain(2, 2, cfg);
    std::vector<Sample> batch(d.samples.begin(), d.samples.begin() + 100);
    chain.train_initial(batch);
    double resid = 0.0;
    int n = 0;
    for (Index i = 100; i < d.size(); ++i) {
        const Sample& s = d.samples[static_cast<std::size_t>(i)];
        // evaluate link 2 with the true previous label, as in training
        VectorXd aug(3);
        aug.head(2) = s.x;
        aug(2) = s.y(0);
        resid += std::abs(chain.links()[1].predict(aug)(0) - s.y(1));
        ++n;
        chain.update(s.x, s.y);
    }
    CHECK(resid / n < 0.05);
}

TEST_CASE("chain inference consumes crisp predictions of earlier links") {
    LearnConfig cfg;
    ChainModel chain(1, 2, cfg);
    Dataset d;
    d.p = 1;
    d.k = 2;
    std::mt19937_64 rng(43);
    std::normal_distribution<double> g(0.0, 0.4);
    for (Index i = 0; i < 200; ++i) {
        const int cls = static_cast<int>(i) % 2;
        Sample s;
        s.id = i;
        s.x = VectorXd::Constant(1, (cls ? 3.0 : -3.0) + g(rng));
        s.y.resize(2);
        s.y << cls, 1 - cls;
        d.samples.push_back(std::move(s));
    }
    chain.train_initial(d.samples);
    VectorXd x = VectorXd::Constant(1, 3.0);
    const VectorXd a = chain.predict(x);
    const VectorXd b = chain.predict(x);
    CHECK((a - b).norm() == 0.0);  // deterministic
    CHECK(predict_crisp(a)(0) == 1);
    CHECK(predict_crisp(a)(1) == 0);
}

TEST_CASE("freeze") {
    BlobSpec spec;
    spec.n = 200;
    spec.p = 6;
    spec.k = 3;
    spec.combos = 4;
    spec.held_back = 1;
    spec.informative = 4;
    spec.seed = 77;
    const Dataset d = make_blob_stream(spec);
    LearnConfig cfg;
    auto model = make_model("static-efcml", d.p, d.k, cfg);
    std::vector<Sample> batch(d.samples.begin(), d.samples.begin() + 50);
    model->train_initial(batch);

    SUBCASE("updates are no-ops") {
        const Index rules_before = model->rule_count();
        const nlohmann::json before = model->to_json();
        for (Index i = 50; i < d.size(); ++i)
            model->update(d.samples[static_cast<std::size_t>(i)].x, d.samples[static_cast<std::size_t>(i)].y);
        CHECK(model->rule_count() == rules_before);
        CHECK(model->to_json() == before);
    }
    SUBCASE("freeze is idempotent") {
        auto once = make_model("efcml", d.p, d.k, cfg);
        auto frozen = freeze(std::move(once));
        const auto* raw = frozen.get();
        auto twice = freeze(std::move(frozen));
        CHECK(twice.get() == raw);
        CHECK(twice->method_name() == "static-efcml");
    }
    SUBCASE("method tags wrap the serialization") {
        CHECK(model->to_json().at("method") == "static-efcml");
    }
}

TEST_CASE("frozen model falls behind an evolving one on a drifting stream") {
    BlobSpec spec;
    spec.n = 500;
    spec.p = 8;
    spec.k = 4;
    spec.combos = 6;
    spec.held_back = 3;       // a large novel share appears mid-stream
    spec.novel_fraction = 0.6;
    spec.informative = 6;
    spec.label_flip = 0.02;
    spec.seed = 99;
    const Dataset d = make_blob_stream(spec);
    const StreamSplit split = split_stream(d, 0.3);

    LearnConfig cfg;
    cfg.alpha = 0.01;
    cfg.beta = 1.0;
    cfg.fac = 0.5;
    auto evolving = make_model("efcml", d.p, d.k, cfg);
    auto frozen = make_model("static-efcml", d.p, d.k, cfg);
    evolving->train_initial(split.initial_batch.samples);
    frozen->train_initial(split.initial_batch.samples);

    MetricState ms_e, ms_f;
    ms_e.k = ms_f.k = d.k;
    for (const Sample& s : split.stream.samples) {
        update_metrics(ms_e, evolving->predict(s.x), s.y);
        update_metrics(ms_f, frozen->predict(s.x), s.y);
        evolving->update(s.x, s.y);
        frozen->update(s.x, s.y);
    }
    CHECK(ms_e.pa > ms_f.pa);
}
