#include "efcml/synthetic.hpp"

#include "efcml/errors.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <vector>

namespace efcml {

namespace {

void finalize(Dataset& d) {
    d.feature_ranges.assign(static_cast<std::size_t>(d.p), Range{0.0, 0.0});
    for (Index j = 0; j < d.p; ++j) {
        double lo = d.samples.front().x(j);
        double hi = lo;
        for (const auto& s : d.samples) {
            lo = std::min(lo, s.x(j));
            hi = std::max(hi, s.x(j));
        }
        d.feature_ranges[static_cast<std::size_t>(j)] = Range{lo, hi};
    }
    for (Index c = 0; c < d.k; ++c) d.label_names.push_back("label" + std::to_string(c));
}

}  // namespace

Dataset make_blob_stream(const BlobSpec& spec) {
    if (spec.combos < 2 || spec.held_back >= spec.combos)
        throw Error("blob spec needs at least two combos and fewer held-back ones");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // distinct label combinations; paired labels usually agree
    std::set<std::vector<int>> seen;
    std::vector<VectorXi> combos;
    while (static_cast<Index>(combos.size()) < spec.combos) {
        VectorXi y = VectorXi::Zero(spec.k);
        for (Index j = 0; j < spec.k; j += 2) {
            const int v = unif(rng) < 0.5 ? 0 : 1;
            y(j) = v;
            if (j + 1 < spec.k) y(j + 1) = unif(rng) < 0.85 ? v : 1 - v;
        }
        if (y.sum() == 0) y(static_cast<Index>(combos.size()) % spec.k) = 1;
        std::vector<int> key(y.data(), y.data() + y.size());
        if (seen.insert(key).second) combos.push_back(y);
    }

    const Index informative = std::min(spec.informative, spec.p);
    std::vector<VectorXd> centers;
    for (Index g = 0; g < spec.combos; ++g) {
        VectorXd c(informative);
        for (Index j = 0; j < informative; ++j) c(j) = spec.center_scale * gauss(rng);
        centers.push_back(std::move(c));
    }

    const Index early = spec.combos - spec.held_back;
    const auto novel_start = static_cast<Index>((1.0 - spec.novel_fraction) * spec.n);

    Dataset d;
    d.p = spec.p;
    d.k = spec.k;
    for (Index i = 0; i < spec.n; ++i) {
        const Index pool = (i < novel_start || spec.held_back == 0) ? early : spec.combos;
        const auto g = static_cast<Index>(unif(rng) * pool) % pool;
        Sample s;
        s.id = i;
        s.x.resize(spec.p);
        for (Index j = 0; j < informative; ++j)
            s.x(j) = centers[static_cast<std::size_t>(g)](j) + spec.feature_noise * gauss(rng);
        for (Index j = informative; j < spec.p; ++j) s.x(j) = spec.nuisance_scale * gauss(rng);
        s.y = combos[static_cast<std::size_t>(g)];
        for (Index c = 0; c < spec.k; ++c)
            if (unif(rng) < spec.label_flip) s.y(c) = 1 - s.y(c);
        d.samples.push_back(std::move(s));
    }
    finalize(d);
    return d;
}

Dataset make_correlated_pair_stream(Index n, Index p, double label_flip, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Dataset d;
    d.p = p;
    d.k = 2;
    for (Index i = 0; i < n; ++i) {
        const int cls = unif(rng) < 0.5 ? 0 : 1;
        Sample s;
        s.id = i;
        s.x.resize(p);
        for (Index j = 0; j < p; ++j)
            s.x(j) = (cls == 1 ? 3.0 : -3.0) * (j == 0 ? 1.0 : 0.25) + gauss(rng);
        s.y.resize(2);
        s.y(0) = cls;
        s.y(1) = cls;
        for (Index c = 0; c < 2; ++c)
            if (unif(rng) < label_flip) s.y(c) = 1 - s.y(c);
        d.samples.push_back(std::move(s));
    }
    finalize(d);
    return d;
}

}  // namespace efcml
