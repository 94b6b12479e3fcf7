#pragma once

#include "efcml/types.hpp"

#include <cstdint>

namespace efcml {

/// Seeded multi-label blob stream: each label combination owns a Gaussian
/// blob over the leading `informative` feature dimensions, the remaining
/// dimensions carry pure noise. Labels inside paired groups mostly share
/// values across combos, so neighbouring labels are strongly correlated.
/// The last `held_back` combos only start appearing in the trailing
/// `novel_fraction` share of the stream.
struct BlobSpec {
    Index n = 593;
    Index p = 72;
    Index k = 6;
    Index informative = 10;
    Index combos = 8;
    Index held_back = 2;
    double center_scale = 6.0;
    double feature_noise = 1.0;
    double nuisance_scale = 1.0;
    double label_flip = 0.08;
    double novel_fraction = 0.35;
    std::uint64_t seed = 1;
};

Dataset make_blob_stream(const BlobSpec& spec);

/// Two-label stream with y2 = y1 (before flip noise): one blob per class of
/// label 1, `label_flip` independent flip noise on both labels.
Dataset make_correlated_pair_stream(Index n, Index p, double label_flip, std::uint64_t seed);

}  // namespace efcml
