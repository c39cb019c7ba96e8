#include "pacc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "pacc/errors.hpp"
#include "pacc/rng.hpp"

namespace pacc {

namespace {

void require_rows(const SampleSet& set, const char* op) {
  set.validate();
  if (set.size() == 0) throw DataError(std::string(op) + " needs a nonempty sample set");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double accuracy(const ModelSpec& model, const ParameterVector& params,
                const SampleSet& set) {
  require_rows(set, "accuracy");
  auto preds = predict_classes(model, params, set.features);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < preds.size(); ++r) {
    if (preds[r] == set.labels[r]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double sensitivity_rate(const ModelSpec& model, const ParameterVector& params,
                        const SampleSet& set, const CounterfactualMap& map) {
  require_rows(set, "sensitivity_rate");
  auto base = predict_classes(model, params, set.features);
  auto flipped = predict_classes(model, params, counterfactual_set(set, map).features);
  std::size_t changed = 0;
  for (std::size_t r = 0; r < base.size(); ++r) {
    if (base[r] != flipped[r]) ++changed;
  }
  return static_cast<double>(changed) / static_cast<double>(base.size());
}

std::vector<RobustPoint> robust_accuracy_sweep(
    const ModelSpec& model, const ParameterVector& params, const SampleSet& set,
    const std::vector<double>& grid, const AdversarialConfig& attack,
    std::uint64_t seed, const LossSpec& objective) {
  require_rows(set, "robust_accuracy_sweep");
  if (grid.empty()) throw ConfigError("robust_accuracy_sweep needs a nonempty grid");
  for (std::size_t e = 0; e < grid.size(); ++e) {
    if (!(grid[e] >= 0.0)) throw ConfigError("attack radii must be nonnegative");
    if (e > 0 && !(grid[e] > grid[e - 1])) {
      throw ConfigError("attack radius grid must be strictly ascending");
    }
  }

  const std::size_t n = set.size();
  std::vector<char> broken(n, 0);

  // Strongest candidate seen so far per row, measured by objective loss. The
  // clean row seeds the pool, so rows misclassified without any attack count
  // as broken at every radius.
  SampleSet carried = set;
  std::vector<double> carried_loss =
      loss_rows(objective, forward_batch(model, params, set.features), set.labels);
  {
    auto clean_preds = predict_classes(model, params, set.features);
    for (std::size_t r = 0; r < n; ++r) {
      if (clean_preds[r] != set.labels[r]) broken[r] = 1;
    }
  }

  Rng base(seed);
  std::vector<RobustPoint> table;
  table.reserve(grid.size());
  const std::size_t d = set.dim();
  for (std::size_t e = 0; e < grid.size(); ++e) {
    AdversarialConfig cfg = attack;
    cfg.prior.kind = EpsilonPrior::Kind::Fixed;
    cfg.prior.value = grid[e];
    std::uint64_t attack_seed = base.derive(e).next_u64();
    SampleSet adv = attack_set(model, params, set, cfg, attack_seed, objective);
    auto adv_preds = predict_classes(model, params, adv.features);
    auto adv_loss = loss_rows(objective, forward_batch(model, params, adv.features),
                              set.labels);
    for (std::size_t r = 0; r < n; ++r) {
      if (adv_preds[r] != set.labels[r]) broken[r] = 1;
      if (adv_loss[r] > carried_loss[r]) {
        carried_loss[r] = adv_loss[r];
        for (std::size_t c = 0; c < d; ++c) {
          carried.features.at(r, c) = adv.features.at(r, c);
        }
      }
    }
    // Replay the carried pool: a candidate found at a smaller radius lies
    // inside every later ball around the same row.
    auto pool_preds = predict_classes(model, params, carried.features);
    std::size_t intact = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (pool_preds[r] != set.labels[r]) broken[r] = 1;
      if (!broken[r]) ++intact;
    }
    table.push_back({grid[e], static_cast<double>(intact) / static_cast<double>(n)});
  }
  return table;
}

void write_robust_sweep_csv(std::ostream& out, const std::vector<RobustPoint>& table) {
  out << "epsilon,accuracy\n";
  for (const auto& row : table) {
    out << fmt(row.epsilon) << "," << fmt(row.accuracy) << "\n";
  }
}

DualSensitivityReport dual_sensitivity_report(const std::vector<double>& lambda,
                                              const SampleSet& set,
                                              const ColumnMetadata& meta,
                                              double quantile,
                                              std::size_t num_bins) {
  require_rows(set, "dual_sensitivity_report");
  if (lambda.size() != set.size()) {
    throw ShapeError("dual vector has " + std::to_string(lambda.size()) +
                     " entries for " + std::to_string(set.size()) + " rows");
  }
  if (!(quantile > 0.0 && quantile < 1.0)) {
    throw ConfigError("report quantile must lie in (0, 1)");
  }
  if (num_bins == 0) throw ConfigError("histogram needs at least one bin");
  for (double v : lambda) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw NumericError("dual variables must be finite and nonnegative");
    }
  }

  DualSensitivityReport report;
  report.total = lambda.size();
  report.quantile = quantile;

  const std::size_t n = lambda.size();
  double max_pos = 0.0, min_pos = 0.0;
  bool any_pos = false;
  for (double v : lambda) {
    if (v == 0.0) {
      ++report.zero_count;
    } else if (!any_pos) {
      min_pos = max_pos = v;
      any_pos = true;
    } else {
      min_pos = std::min(min_pos, v);
      max_pos = std::max(max_pos, v);
    }
  }

  report.bins.push_back({0.0, 0.0, report.zero_count});
  if (any_pos) {
    double width = (max_pos - min_pos) / static_cast<double>(num_bins);
    std::vector<std::size_t> counts(num_bins, 0);
    for (double v : lambda) {
      if (v == 0.0) continue;
      std::size_t b = num_bins - 1;
      if (width > 0.0) {
        b = std::min<std::size_t>(
            static_cast<std::size_t>((v - min_pos) / width), num_bins - 1);
      }
      ++counts[b];
    }
    for (std::size_t b = 0; b < num_bins; ++b) {
      report.bins.push_back({min_pos + width * static_cast<double>(b),
                             b + 1 == num_bins ? max_pos
                                               : min_pos + width * static_cast<double>(b + 1),
                             counts[b]});
    }
  }

  report.degenerate = !any_pos;
  std::vector<char> selected(n, 0);
  if (any_pos) {
    std::vector<double> sorted = lambda;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    auto k = static_cast<std::size_t>(
        std::ceil(quantile * static_cast<double>(n)));
    k = std::max<std::size_t>(1, std::min(k, n));
    report.threshold = sorted[k - 1];
    for (std::size_t r = 0; r < n; ++r) {
      if (lambda[r] > 0.0 && lambda[r] >= report.threshold) {
        selected[r] = 1;
        ++report.selected_count;
      }
    }
  }

  for (const auto& col : meta.columns) {
    if (col.type != ColumnType::Categorical) continue;
    for (std::size_t j = 0; j < col.levels.size(); ++j) {
      std::size_t base_hits = 0, top_hits = 0;
      for (std::size_t r = 0; r < n; ++r) {
        if (set.features.at(r, col.offset + j) > 0.5) {
          ++base_hits;
          if (selected[r]) ++top_hits;
        }
      }
      PrevalenceRow row;
      row.column = col.name;
      row.level = col.levels[j];
      row.base_rate = static_cast<double>(base_hits) / static_cast<double>(n);
      row.top_rate = report.selected_count == 0
                         ? 0.0
                         : static_cast<double>(top_hits) /
                               static_cast<double>(report.selected_count);
      row.ratio = row.base_rate > 0.0 ? row.top_rate / row.base_rate : 0.0;
      report.prevalence.push_back(std::move(row));
    }
  }
  return report;
}

void DualSensitivityReport::write_histogram_csv(std::ostream& out) const {
  out << "lo,hi,count\n";
  for (const auto& bin : bins) {
    out << fmt(bin.lo) << "," << fmt(bin.hi) << "," << bin.count << "\n";
  }
}

void DualSensitivityReport::write_prevalence_csv(std::ostream& out) const {
  out << "column,level,base_rate,top_rate,ratio\n";
  for (const auto& row : prevalence) {
    out << row.column << "," << row.level << "," << fmt(row.base_rate) << ","
        << fmt(row.top_rate) << "," << fmt(row.ratio) << "\n";
  }
}

}  // namespace pacc
