#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pacc/array.hpp"
#include "pacc/sample.hpp"

namespace pacc {

enum class ColumnType { Categorical, Numeric };
enum class ColumnRole { Feature, Label, Protected, Dropped };

struct ColumnDesc {
  std::string name;
  ColumnType type = ColumnType::Categorical;
  ColumnRole role = ColumnRole::Feature;
  // Optional pinned level set; values outside it are schema errors unless a
  // catch-all GroupLevels rewrites them first.
  std::vector<std::string> levels;
};

struct Transform {
  enum class Op { Drop, GroupLevels, BinQuantiles, BinThreshold };

  Op op = Op::Drop;
  std::string column;
  // GroupLevels: map each of `levels` to `to`; with others=true instead map
  // every value not in `except` to `to`.
  std::vector<std::string> levels;
  std::string to;
  bool others = false;
  std::vector<std::string> except;
  // BinQuantiles: number of quantile bins (ties-low, linear-interp edges).
  int bins = 0;
  // BinThreshold: ascending edges; value <= edge[j] lands in bin j.
  std::vector<double> edges;
};

struct DatasetSchema {
  enum class Missing { DropRow, Error };

  std::vector<ColumnDesc> columns;
  std::vector<Transform> transforms;
  Missing missing = Missing::DropRow;
  std::vector<std::string> missing_tokens = {"", "?"};

  void validate() const;
};

// One original column's place in the encoded feature matrix: categorical
// columns one-hot over their sorted levels, numeric columns min-max scaled to
// [0, 1] (constant columns scale to 0).
struct EncodedColumn {
  std::string name;
  ColumnType type = ColumnType::Categorical;
  ColumnRole role = ColumnRole::Feature;
  std::size_t offset = 0;
  std::size_t width = 1;
  std::vector<std::string> levels;  // categorical
  double min_value = 0.0;           // numeric
  double max_value = 0.0;
};

struct ColumnMetadata {
  std::vector<EncodedColumn> columns;
  std::string label_name;
  std::vector<std::string> label_levels;

  const EncodedColumn* find(const std::string& name) const;
  std::size_t encoded_dim() const;
  // Inverts the encoding of one feature row back to per-column strings.
  std::vector<std::string> decode_row(const NumArray& row) const;
};

struct LoadedDataset {
  SampleSet samples;
  ColumnMetadata meta;
  std::size_t dropped_rows = 0;
};

// Parses, transforms, and encodes a CSV with a header row matching the schema
// column names in order. Deterministic: level order is lexicographic, row
// order is file order.
LoadedDataset load_dataset(const std::string& path, const DatasetSchema& schema);
LoadedDataset load_dataset_rows(const std::vector<std::vector<std::string>>& rows,
                                const DatasetSchema& schema,
                                const std::string& source_id);

struct SplitResult {
  SampleSet train, validation, test;
  std::vector<std::string> warnings;  // e.g. a label missing from a split
};

// Deterministic stratified split: per label, a seeded shuffle and a
// largest-remainder allocation over (train, validation, test).
SplitResult stratified_split(const SampleSet& set,
                             const std::array<double, 3>& fractions,
                             std::uint64_t seed);

// Linear-interpolation quantile of already-sorted values, q in [0, 1].
double sorted_quantile(const std::vector<double>& sorted_values, double q);

}  // namespace pacc
