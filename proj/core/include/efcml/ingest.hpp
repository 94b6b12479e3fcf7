#pragma once

#include "efcml/errors.hpp"
#include "efcml/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace efcml {

/// Parse a MULAN label spec (<label name="..."/> elements). Names are matched
/// case-sensitively against ARFF attribute names.
std::vector<std::string> load_label_xml(const std::filesystem::path& xml_path);

/// Load a MULAN-style dense ARFF file. Attributes named in `label_names` become
/// the K label columns (declaration order); the remaining numeric attributes are
/// the p features, in declaration order.
Dataset load_arff(const std::filesystem::path& arff_path,
                  const std::vector<std::string>& label_names);

Dataset load_arff(const std::filesystem::path& arff_path,
                  const std::filesystem::path& label_xml_path);

/// Load a plain CSV file with `num_labels` binary label columns at the end
/// (or the front when `labels_at_end` is false).
Dataset load_csv(const std::filesystem::path& csv_path, Index num_labels,
                 bool labels_at_end = true, bool has_header = false);

void save_csv(const Dataset& d, const std::filesystem::path& csv_path,
              bool labels_at_end = true, bool write_header = false);

/// Write a dataset as dense ARFF plus the matching MULAN label XML.
void save_arff(const Dataset& d, const std::filesystem::path& arff_path,
               const std::filesystem::path& xml_path,
               const std::string& relation_name);

/// First ceil(fraction*N) samples become the initial batch, the rest the
/// stream; source order is preserved.
StreamSplit split_stream(const Dataset& d, double fraction);

std::vector<Range> update_ranges(std::vector<Range> ranges, const VectorXd& x);

}  // namespace efcml
