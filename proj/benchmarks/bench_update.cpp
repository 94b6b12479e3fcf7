// Per-sample update and inference cost of the stream classifiers on a
// synthetic multi-label blob stream.

#include "efcml/baselines.hpp"
#include "efcml/ingest.hpp"
#include "efcml/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <memory>

namespace {

struct Fixture {
    efcml::Dataset data;
    efcml::StreamSplit split;

    Fixture() {
        efcml::BlobSpec spec;
        spec.n = 400;
        spec.p = 24;
        spec.k = 6;
        spec.informative = 8;
        spec.seed = 99;
        data = efcml::make_blob_stream(spec);
        split = efcml::split_stream(data, 0.25);
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

std::unique_ptr<efcml::MultiLabelModel> trained(const std::string& method) {
    efcml::LearnConfig cfg;
    cfg.alpha = 0.01;
    cfg.beta = 1.0;
    cfg.fac = 0.5;
    auto model = efcml::make_model(method, fixture().data.p, fixture().data.k, cfg);
    model->train_initial(fixture().split.initial_batch.samples);
    return model;
}

void run_updates(benchmark::State& state, const std::string& method) {
    auto model = trained(method);
    const auto& stream = fixture().split.stream.samples;
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& s = stream[i++ % stream.size()];
        model->update(s.x, s.y);
        benchmark::DoNotOptimize(model->rule_count());
    }
}

void BM_UpdateEfcml(benchmark::State& state) { run_updates(state, "efcml"); }
void BM_UpdateOvr(benchmark::State& state) { run_updates(state, "ovr"); }
void BM_UpdateChain(benchmark::State& state) { run_updates(state, "chain"); }

void BM_Predict(benchmark::State& state) {
    auto model = trained("efcml");
    const auto& stream = fixture().split.stream.samples;
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& s = stream[i++ % stream.size()];
        benchmark::DoNotOptimize(model->predict(s.x));
    }
}

}  // namespace

BENCHMARK(BM_UpdateEfcml)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_UpdateOvr)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_UpdateChain)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Predict)->Unit(benchmark::kMicrosecond);
