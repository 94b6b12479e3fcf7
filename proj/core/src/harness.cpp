#include "efcml/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <numeric>
#include <random>
#include <thread>

namespace efcml {

namespace {

std::string fmt9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

struct GridPoint {
    double alpha;
    double beta;
    double fac;
};

double cv_error(const Dataset& batch, const std::string& method, const LearnConfig& cfg,
                const std::vector<int>& fold_of, int folds) {
    double err_sum = 0.0;
    int counted = 0;
    for (int f = 0; f < folds; ++f) {
        std::vector<Sample> train;
        std::vector<const Sample*> valid;
        for (std::size_t i = 0; i < batch.samples.size(); ++i) {
            if (fold_of[i] == f)
                valid.push_back(&batch.samples[i]);
            else
                train.push_back(batch.samples[i]);
        }
        if (train.empty() || valid.empty()) continue;
        auto model = make_model(method, batch.p, batch.k, cfg);
        model->train_initial(train);
        MetricState ms;
        ms.k = batch.k;
        for (const Sample* s : valid)
            update_pa(ms, pa_contribution(predict_crisp(model->predict(s->x)), s->y));
        err_sum += 1.0 - ms.pa;
        ++counted;
    }
    return counted > 0 ? err_sum / counted : 1.0;
}

}  // namespace

LearnConfig grid_search(const Dataset& batch, const std::string& method, const GridSpec& grid,
                        int folds, const LearnConfig& base, std::uint64_t seed) {
    if (grid.alphas.empty() || grid.betas.empty() || grid.vigilances.empty())
        throw Error("grid axes must be non-empty");
    if (batch.size() < folds) throw BatchTooSmallError("initial batch smaller than fold count");

    const bool tune_consequents = method == "efcml" || method == "static-efcml";
    std::vector<GridPoint> points;
    for (double fac : grid.vigilances) {
        if (tune_consequents) {
            for (double a : grid.alphas)
                for (double b : grid.betas) points.push_back({a, b, fac});
        } else {
            points.push_back({base.alpha, base.beta, fac});
        }
    }

    if (points.size() == 1) {
        LearnConfig cfg = base;
        cfg.alpha = points[0].alpha;
        cfg.beta = points[0].beta;
        cfg.fac = points[0].fac;
        return cfg;
    }

    // seeded fold assignment, shared by every grid point
    std::vector<int> fold_of(batch.samples.size());
    {
        std::vector<std::size_t> order(batch.samples.size());
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t r = 0; r < order.size(); ++r)
            fold_of[order[r]] = static_cast<int>(r % static_cast<std::size_t>(folds));
    }

    std::vector<double> errors(points.size());
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> futs;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < workers; ++w) {
        futs.push_back(std::async(std::launch::async, [&] {
            for (std::size_t idx; (idx = next.fetch_add(1)) < points.size();) {
                LearnConfig cfg = base;
                cfg.alpha = points[idx].alpha;
                cfg.beta = points[idx].beta;
                cfg.fac = points[idx].fac;
                errors[idx] = cv_error(batch, method, cfg, fold_of, folds);
            }
        }));
    }
    for (auto& f : futs) f.get();

    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i)
        if (errors[i] < errors[best]) best = i;

    LearnConfig cfg = base;
    cfg.alpha = points[best].alpha;
    cfg.beta = points[best].beta;
    cfg.fac = points[best].fac;
    return cfg;
}

Dataset load_dataset(const RunSpec& spec) {
    if (spec.csv_labels > 0)
        return load_csv(spec.data_path, spec.csv_labels, spec.csv_labels_at_end, spec.csv_header);
    if (!spec.labels_xml.empty()) return load_arff(spec.data_path, spec.labels_xml);
    throw Error("specify --labels-xml for ARFF input or --csv-labels for CSV input");
}

RunResult run_interleaved(const RunSpec& spec) { return run_interleaved(spec, load_dataset(spec)); }

RunResult run_interleaved(const RunSpec& spec, const Dataset& data) {
    using clock = std::chrono::steady_clock;
    if (!(spec.budget > 0.0 && spec.budget <= 1.0)) throw Error("budget must lie in (0,1]");

    const StreamSplit split = split_stream(data, spec.split_fraction);

    RunResult out;
    out.config = spec.base;
    out.config.budget = spec.budget;
    if (spec.grid)
        out.config = grid_search(split.initial_batch, spec.method, *spec.grid, spec.grid->folds,
                                 out.config, spec.seed);

    auto model = make_model(spec.method, data.p, data.k, out.config);
    model->train_initial(split.initial_batch.samples);

    const bool al_on = spec.al_mode != AlMode::Off;
    if (al_on && spec.al_mode != AlMode::Random && model->selection_rulebase() == nullptr)
        throw Error("active learning criteria need the joint rule base (method efcml)");

    BudgetState budget;
    budget.mode = spec.al_mode == AlMode::Labels ? BudgetMode::LabelsBased : BudgetMode::SamplesBased;
    budget.budget = spec.budget;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    MetricState ms;
    ms.k = data.k;
    out.final_metrics = ms;
    double cum_update = 0.0;
    std::int64_t updates_timed = 0;

    try {
        std::int64_t n = 0;
        for (const Sample& s : split.stream.samples) {
            ++n;
            const VectorXd yhat = model->predict(s.x);
            update_metrics(ms, yhat, s.y);

            const auto t0 = clock::now();
            double selected_fraction = 1.0;
            if (!al_on) {
                model->update(s.x, s.y.cast<int>());
            } else if (spec.al_mode == AlMode::Random) {
                const bool want = unif(rng) < spec.budget;
                const bool take = want && gate(budget, 1, 1);
                budget.seen_samples += 1;
                budget.seen_units += 1;
                if (take) {
                    budget.selected_units += 1;
                    model->update(s.x, s.y.cast<int>());
                }
                out.selection.push_back({s.id, take ? "full" : "none", 0u, {},
                                         budget.spend_fraction()});
                selected_fraction = budget.spend_fraction();
            } else {
                const SelectionDecision d = select(*model->selection_rulebase(), s.x, budget);
                if (d.verdict == SelectionDecision::Verdict::Full)
                    model->update(s.x, s.y.cast<int>());
                else if (d.verdict == SelectionDecision::Verdict::Partial)
                    model->update_partial(s.x, s.y.cast<int>(), d.labels);
                const char* verdict = d.verdict == SelectionDecision::Verdict::Full ? "full"
                                      : d.verdict == SelectionDecision::Verdict::Partial ? "partial"
                                                                                         : "none";
                out.selection.push_back({s.id, verdict, d.triggers,
                                         d.verdict == SelectionDecision::Verdict::Partial
                                             ? d.labels
                                             : std::vector<Index>{},
                                         budget.spend_fraction()});
                selected_fraction = budget.spend_fraction();
            }
            cum_update += std::chrono::duration<double>(clock::now() - t0).count();
            ++updates_timed;

            out.trend.push_back(
                {n, ms.pa, ms.ap, model->rule_count(), selected_fraction, cum_update});
        }
    } catch (const Error&) {
        if (!spec.out_dir.empty()) {
            std::filesystem::create_directories(spec.out_dir);
            emit_trends(out.trend, spec.out_dir / "trend.csv");
        }
        throw;
    }

    out.final_metrics = ms;
    out.mean_update_seconds = updates_timed > 0 ? cum_update / static_cast<double>(updates_timed) : 0.0;
    out.final_rules = model->rule_count();
    out.model_json = model->to_json();

    if (!spec.out_dir.empty()) {
        std::filesystem::create_directories(spec.out_dir);
        emit_trends(out.trend, spec.out_dir / "trend.csv");
        emit_selection_log(out.selection, spec.out_dir / "selection.csv");
        std::ofstream mjs(spec.out_dir / "model.json", std::ios::binary);
        mjs << out.model_json.dump(2) << '\n';
        nlohmann::json cj = config_to_json(out.config);
        cj["method"] = spec.method;
        cj["seed"] = spec.seed;
        cj["split_fraction"] = spec.split_fraction;
        std::ofstream cjs(spec.out_dir / "config.json", std::ios::binary);
        cjs << cj.dump(2) << "\n";
    }
    return out;
}

void emit_trends(const std::vector<TrendPoint>& points, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write trend file: " + path.string());
    out << "n,pa,ap,rules,selected_fraction,cum_update_seconds\n";
    for (const auto& t : points) {
        out << t.n << ',' << fmt9(t.pa) << ',' << fmt9(t.ap) << ',' << t.rules << ','
            << fmt9(t.selected_fraction) << ',' << fmt9(t.cum_update_seconds) << '\n';
    }
}

void emit_selection_log(const std::vector<SelectionLogRow>& rows,
                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write selection log: " + path.string());
    out << "id,verdict,triggers,labels,spend_fraction\n";
    for (const auto& r : rows) {
        std::string trig;
        if (r.triggers & static_cast<unsigned>(Trigger::Novelty)) trig += "novelty";
        if (r.triggers & static_cast<unsigned>(Trigger::OutputUncertainty))
            trig += trig.empty() ? "uncertainty" : "|uncertainty";
        if (r.triggers & static_cast<unsigned>(Trigger::ParamInstability))
            trig += trig.empty() ? "instability" : "|instability";
        std::string labels;
        for (std::size_t i = 0; i < r.labels.size(); ++i)
            labels += (i ? ";" : "") + std::to_string(r.labels[i]);
        out << r.sample_id << ',' << r.verdict << ',' << trig << ',' << labels << ','
            << fmt9(r.spend_fraction) << '\n';
    }
}

double time_updates(const RunSpec& spec, const Dataset& data) {
    return run_interleaved(spec, data).mean_update_seconds;
}

}  // namespace efcml
