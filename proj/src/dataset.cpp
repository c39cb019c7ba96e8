#include "pacc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "pacc/csv.hpp"
#include "pacc/errors.hpp"
#include "pacc/rng.hpp"

namespace pacc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return s.substr(b, e - b);
}

double parse_number(const std::string& text, std::size_t row, const std::string& column) {
  try {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    if (!std::isfinite(v)) {
      throw DataError("non-finite value '" + text + "' in column '" + column +
                      "' at data row " + std::to_string(row));
    }
    return v;
  } catch (const DataError&) {
    throw;
  } catch (const std::exception&) {
    throw DataError("cannot parse '" + text + "' as a number in column '" + column +
                    "' at data row " + std::to_string(row));
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Working state of one column while transforms run: categorical columns hold
// strings, numeric columns hold parsed doubles.
struct WorkColumn {
  ColumnType type = ColumnType::Categorical;
  bool dropped = false;
  std::vector<std::string> text;
  std::vector<double> values;
};

std::vector<std::string> sorted_unique(const std::vector<std::string>& values) {
  std::set<std::string> uniq(values.begin(), values.end());
  return {uniq.begin(), uniq.end()};
}

std::size_t bin_of(double v, const std::vector<double>& edges) {
  for (std::size_t j = 0; j < edges.size(); ++j) {
    if (v <= edges[j]) return j;
  }
  return edges.size();
}

}  // namespace

void DatasetSchema::validate() const {
  if (columns.empty()) throw SchemaError("schema has no columns");
  std::unordered_set<std::string> names;
  std::size_t labels = 0;
  for (const auto& col : columns) {
    if (col.name.empty()) throw SchemaError("schema column with empty name");
    if (!names.insert(col.name).second) {
      throw SchemaError("duplicate schema column '" + col.name + "'");
    }
    if (col.role == ColumnRole::Label) {
      ++labels;
      if (col.type != ColumnType::Categorical) {
        throw SchemaError("label column '" + col.name + "' must be categorical");
      }
    }
  }
  if (labels != 1) {
    throw SchemaError("schema needs exactly one label column, found " + std::to_string(labels));
  }
  for (const auto& t : transforms) {
    if (!names.count(t.column)) {
      throw SchemaError("transform references unknown column '" + t.column + "'");
    }
    switch (t.op) {
      case Transform::Op::Drop:
        break;
      case Transform::Op::GroupLevels:
        if (t.to.empty()) {
          throw SchemaError("group_levels on '" + t.column + "' has an empty target level");
        }
        if (!t.others && t.levels.empty()) {
          throw SchemaError("group_levels on '" + t.column + "' lists no source levels");
        }
        break;
      case Transform::Op::BinQuantiles:
        if (t.bins < 2) {
          throw SchemaError("bin_quantiles on '" + t.column + "' needs at least 2 bins");
        }
        break;
      case Transform::Op::BinThreshold:
        if (t.edges.empty()) {
          throw SchemaError("bin_threshold on '" + t.column + "' has no edges");
        }
        for (std::size_t j = 1; j < t.edges.size(); ++j) {
          if (!(t.edges[j] > t.edges[j - 1])) {
            throw SchemaError("bin_threshold edges on '" + t.column +
                              "' must be strictly ascending");
          }
        }
        break;
    }
  }
}

double sorted_quantile(const std::vector<double>& sorted_values, double q) {
  if (sorted_values.empty()) throw DataError("quantile of an empty sample");
  if (q < 0.0 || q > 1.0) throw ConfigError("quantile level must lie in [0, 1]");
  const std::size_t n = sorted_values.size();
  double h = q * static_cast<double>(n - 1);
  auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return sorted_values[n - 1];
  double frac = h - static_cast<double>(lo);
  return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

const EncodedColumn* ColumnMetadata::find(const std::string& name) const {
  for (const auto& col : columns) {
    if (col.name == name) return &col;
  }
  return nullptr;
}

std::size_t ColumnMetadata::encoded_dim() const {
  std::size_t dim = 0;
  for (const auto& col : columns) dim += col.width;
  return dim;
}

std::vector<std::string> ColumnMetadata::decode_row(const NumArray& row) const {
  if (row.rank() != 1 || row.size() != encoded_dim()) {
    throw ShapeError("decode_row expects a rank-1 row of width " +
                     std::to_string(encoded_dim()));
  }
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (const auto& col : columns) {
    if (col.type == ColumnType::Categorical) {
      std::size_t hot = 0;
      double best = row[col.offset];
      for (std::size_t j = 1; j < col.width; ++j) {
        if (row[col.offset + j] > best) {
          best = row[col.offset + j];
          hot = j;
        }
      }
      out.push_back(col.levels[hot]);
    } else {
      double v = row[col.offset] * (col.max_value - col.min_value) + col.min_value;
      out.push_back(format_number(v));
    }
  }
  return out;
}

LoadedDataset load_dataset(const std::string& path, const DatasetSchema& schema) {
  return load_dataset_rows(read_csv_file(path), schema, path);
}

LoadedDataset load_dataset_rows(const std::vector<std::vector<std::string>>& rows,
                                const DatasetSchema& schema,
                                const std::string& source_id) {
  schema.validate();
  if (rows.empty()) throw DataError(source_id + ": no header row");

  const auto& header = rows[0];
  if (header.size() != schema.columns.size()) {
    throw SchemaError(source_id + ": header has " + std::to_string(header.size()) +
                      " columns, schema expects " + std::to_string(schema.columns.size()));
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (trim(header[c]) != schema.columns[c].name) {
      throw SchemaError(source_id + ": header column " + std::to_string(c) + " is '" +
                        trim(header[c]) + "', schema expects '" + schema.columns[c].name + "'");
    }
  }

  const std::size_t num_cols = schema.columns.size();

  // Columns removed by role or by a Drop transform are exempt from the
  // missing-value policy.
  std::vector<bool> effectively_dropped(num_cols, false);
  for (std::size_t c = 0; c < num_cols; ++c) {
    effectively_dropped[c] = schema.columns[c].role == ColumnRole::Dropped;
  }
  for (const auto& t : schema.transforms) {
    if (t.op != Transform::Op::Drop) continue;
    for (std::size_t c = 0; c < num_cols; ++c) {
      if (schema.columns[c].name == t.column) effectively_dropped[c] = true;
    }
  }

  const std::unordered_set<std::string> missing_tokens(schema.missing_tokens.begin(),
                                                       schema.missing_tokens.end());

  std::vector<std::vector<std::string>> kept;
  kept.reserve(rows.size() - 1);
  std::size_t dropped_rows = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& raw = rows[r];
    if (raw.size() != num_cols) {
      throw DataError(source_id + ": data row " + std::to_string(r) + " has " +
                      std::to_string(raw.size()) + " fields, expected " +
                      std::to_string(num_cols));
    }
    std::vector<std::string> cells(num_cols);
    bool missing = false;
    std::string missing_column;
    for (std::size_t c = 0; c < num_cols; ++c) {
      cells[c] = trim(raw[c]);
      if (!effectively_dropped[c] && missing_tokens.count(cells[c])) {
        missing = true;
        if (missing_column.empty()) missing_column = schema.columns[c].name;
      }
    }
    if (missing) {
      if (schema.missing == DatasetSchema::Missing::Error) {
        throw DataError(source_id + ": missing value in column '" + missing_column +
                        "' at data row " + std::to_string(r));
      }
      ++dropped_rows;
      continue;
    }
    kept.push_back(std::move(cells));
  }
  if (kept.empty()) throw DataError(source_id + ": no data rows survive loading");

  const std::size_t n = kept.size();
  std::vector<WorkColumn> work(num_cols);
  for (std::size_t c = 0; c < num_cols; ++c) {
    work[c].type = schema.columns[c].type;
    work[c].dropped = schema.columns[c].role == ColumnRole::Dropped;
    if (work[c].dropped) continue;
    if (work[c].type == ColumnType::Categorical) {
      work[c].text.resize(n);
      for (std::size_t r = 0; r < n; ++r) work[c].text[r] = kept[r][c];
    } else {
      work[c].values.resize(n);
      for (std::size_t r = 0; r < n; ++r) {
        work[c].values[r] = parse_number(kept[r][c], r + 1, schema.columns[c].name);
      }
    }
  }

  auto column_index = [&](const std::string& name) {
    for (std::size_t c = 0; c < num_cols; ++c) {
      if (schema.columns[c].name == name) return c;
    }
    throw SchemaError("unknown column '" + name + "'");
  };

  for (const auto& t : schema.transforms) {
    std::size_t c = column_index(t.column);
    auto& col = work[c];
    switch (t.op) {
      case Transform::Op::Drop:
        col.dropped = true;
        break;
      case Transform::Op::GroupLevels: {
        if (col.dropped) break;
        if (col.type != ColumnType::Categorical) {
          throw SchemaError("group_levels on '" + t.column + "' which is numeric here");
        }
        if (t.others) {
          std::unordered_set<std::string> keep(t.except.begin(), t.except.end());
          for (auto& v : col.text) {
            if (!keep.count(v)) v = t.to;
          }
        } else {
          std::unordered_set<std::string> sources(t.levels.begin(), t.levels.end());
          for (auto& v : col.text) {
            if (sources.count(v)) v = t.to;
          }
        }
        break;
      }
      case Transform::Op::BinQuantiles: {
        if (col.dropped) break;
        if (col.type != ColumnType::Numeric) {
          throw SchemaError("bin_quantiles on '" + t.column + "' which is categorical here");
        }
        std::vector<double> sorted = col.values;
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> edges;
        for (int j = 1; j < t.bins; ++j) {
          edges.push_back(sorted_quantile(sorted, static_cast<double>(j) /
                                                      static_cast<double>(t.bins)));
        }
        col.text.resize(n);
        for (std::size_t r = 0; r < n; ++r) {
          col.text[r] = "bin" + std::to_string(bin_of(col.values[r], edges));
        }
        col.values.clear();
        col.type = ColumnType::Categorical;
        break;
      }
      case Transform::Op::BinThreshold: {
        if (col.dropped) break;
        if (col.type != ColumnType::Numeric) {
          throw SchemaError("bin_threshold on '" + t.column + "' which is categorical here");
        }
        col.text.resize(n);
        for (std::size_t r = 0; r < n; ++r) {
          col.text[r] = "bin" + std::to_string(bin_of(col.values[r], t.edges));
        }
        col.values.clear();
        col.type = ColumnType::Categorical;
        break;
      }
    }
  }

  // Label encoding over sorted levels.
  std::size_t label_col = num_cols;
  for (std::size_t c = 0; c < num_cols; ++c) {
    if (schema.columns[c].role == ColumnRole::Label) label_col = c;
  }
  auto& label_work = work[label_col];
  if (label_work.dropped || label_work.type != ColumnType::Categorical) {
    throw SchemaError("label column '" + schema.columns[label_col].name +
                      "' must survive transforms as categorical");
  }
  std::vector<std::string> label_levels = schema.columns[label_col].levels;
  if (label_levels.empty()) label_levels = sorted_unique(label_work.text);
  std::unordered_map<std::string, int> label_index;
  for (std::size_t j = 0; j < label_levels.size(); ++j) {
    label_index[label_levels[j]] = static_cast<int>(j);
  }
  std::vector<int> labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    auto it = label_index.find(label_work.text[r]);
    if (it == label_index.end()) {
      throw SchemaError("label value '" + label_work.text[r] + "' at data row " +
                        std::to_string(r + 1) + " is not a declared level");
    }
    labels[r] = it->second;
  }

  // Feature encoding in schema order.
  ColumnMetadata meta;
  meta.label_name = schema.columns[label_col].name;
  meta.label_levels = label_levels;
  std::size_t dim = 0;
  struct Plan {
    std::size_t col;
    std::unordered_map<std::string, std::size_t> level_index;
  };
  std::vector<Plan> plans;
  for (std::size_t c = 0; c < num_cols; ++c) {
    const auto& desc = schema.columns[c];
    auto& col = work[c];
    if (col.dropped || desc.role == ColumnRole::Label) continue;
    EncodedColumn enc;
    enc.name = desc.name;
    enc.type = col.type;
    enc.role = desc.role;
    enc.offset = dim;
    Plan plan;
    plan.col = c;
    if (col.type == ColumnType::Categorical) {
      enc.levels = desc.levels.empty() ? sorted_unique(col.text) : desc.levels;
      enc.width = enc.levels.size();
      for (std::size_t j = 0; j < enc.levels.size(); ++j) plan.level_index[enc.levels[j]] = j;
    } else {
      enc.width = 1;
      enc.min_value = *std::min_element(col.values.begin(), col.values.end());
      enc.max_value = *std::max_element(col.values.begin(), col.values.end());
    }
    dim += enc.width;
    meta.columns.push_back(std::move(enc));
    plans.push_back(std::move(plan));
  }
  if (dim == 0) throw SchemaError(source_id + ": no feature columns survive the schema");

  std::vector<double> features(n * dim, 0.0);
  for (std::size_t k = 0; k < meta.columns.size(); ++k) {
    const auto& enc = meta.columns[k];
    const auto& plan = plans[k];
    const auto& col = work[plan.col];
    if (enc.type == ColumnType::Categorical) {
      for (std::size_t r = 0; r < n; ++r) {
        auto it = plan.level_index.find(col.text[r]);
        if (it == plan.level_index.end()) {
          throw SchemaError("value '" + col.text[r] + "' in column '" + enc.name +
                            "' at data row " + std::to_string(r + 1) +
                            " is not a declared level");
        }
        features[r * dim + enc.offset + it->second] = 1.0;
      }
    } else {
      const double span = enc.max_value - enc.min_value;
      for (std::size_t r = 0; r < n; ++r) {
        features[r * dim + enc.offset] =
            span > 0.0 ? (col.values[r] - enc.min_value) / span : 0.0;
      }
    }
  }

  LoadedDataset out;
  out.samples.features = NumArray({n, dim}, std::move(features));
  out.samples.labels = std::move(labels);
  out.samples.source_id = source_id;
  out.samples.validate(label_levels.size());
  out.meta = std::move(meta);
  out.dropped_rows = dropped_rows;
  return out;
}

SplitResult stratified_split(const SampleSet& set,
                             const std::array<double, 3>& fractions,
                             std::uint64_t seed) {
  set.validate();
  double total = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw ConfigError("split fractions must be nonnegative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1, got " + format_number(total));
  }

  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t r = 0; r < set.size(); ++r) by_label[set.labels[r]].push_back(r);

  std::array<std::vector<std::size_t>, 3> parts;
  Rng base(seed);
  for (auto& [label, indices] : by_label) {
    Rng rng = base.derive(static_cast<std::uint64_t>(label));
    for (std::size_t i = indices.size(); i > 1; --i) {
      std::size_t j = rng.uniform_index(i);
      std::swap(indices[i - 1], indices[j]);
    }
    const std::size_t count = indices.size();
    std::array<std::size_t, 3> alloc{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      double exact = fractions[s] * static_cast<double>(count);
      alloc[s] = static_cast<std::size_t>(std::floor(exact));
      remainder[s] = exact - std::floor(exact);
      assigned += alloc[s];
    }
    while (assigned < count) {
      std::size_t best = 0;
      for (std::size_t s = 1; s < 3; ++s) {
        if (remainder[s] > remainder[best]) best = s;
      }
      ++alloc[best];
      remainder[best] = -1.0;
      ++assigned;
    }
    std::size_t pos = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t i = 0; i < alloc[s]; ++i) parts[s].push_back(indices[pos++]);
    }
  }

  SplitResult out;
  const char* names[3] = {"train", "validation", "test"};
  SampleSet* sets[3] = {&out.train, &out.validation, &out.test};
  for (std::size_t s = 0; s < 3; ++s) {
    std::sort(parts[s].begin(), parts[s].end());
    if (!parts[s].empty()) {
      *sets[s] = set.rows(parts[s]);
      sets[s]->source_id = set.source_id + "#" + names[s];
    }
    if (fractions[s] > 0.0) {
      std::set<int> present(sets[s]->labels.begin(), sets[s]->labels.end());
      for (const auto& [label, indices] : by_label) {
        if (!indices.empty() && !present.count(label)) {
          out.warnings.push_back(std::string("label ") + std::to_string(label) +
                                 " is absent from the " + names[s] + " split");
        }
      }
    }
  }
  return out;
}

}  // namespace pacc
