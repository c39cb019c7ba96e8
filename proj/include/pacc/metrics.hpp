#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pacc/dataset.hpp"
#include "pacc/loss.hpp"
#include "pacc/model.hpp"
#include "pacc/perturb.hpp"
#include "pacc/sample.hpp"

namespace pacc {

// Fraction of rows whose predicted class matches the label.
double accuracy(const ModelSpec& model, const ParameterVector& params,
                const SampleSet& set);

// Fraction of rows whose prediction changes when the protected columns are
// rewritten by the map. Ties in both argmaxes resolve to the smallest index.
double sensitivity_rate(const ModelSpec& model, const ParameterVector& params,
                        const SampleSet& set, const CounterfactualMap& map);

struct RobustPoint {
  double epsilon = 0.0;
  double accuracy = 0.0;
};

// Accuracy under the evaluation attack at each radius of an ascending grid.
// Adversarial candidates found at smaller radii stay in the candidate pool at
// larger radii (the balls nest), which makes the curve nonincreasing; at
// epsilon = 0 the value equals the clean accuracy exactly.
std::vector<RobustPoint> robust_accuracy_sweep(
    const ModelSpec& model, const ParameterVector& params, const SampleSet& set,
    const std::vector<double>& grid, const AdversarialConfig& attack,
    std::uint64_t seed, const LossSpec& objective = LossSpec{});

void write_robust_sweep_csv(std::ostream& out, const std::vector<RobustPoint>& table);

struct DualHistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

struct PrevalenceRow {
  std::string column;
  std::string level;
  double base_rate = 0.0;  // level share of the whole set
  double top_rate = 0.0;   // level share of the top-quantile selection
  double ratio = 0.0;      // top_rate / base_rate, 0 when base_rate is 0
};

// Distribution of pointwise dual variables plus who sits in the top quantile.
// Selection is rank-based: the k = ceil(quantile * N) largest entries, ties at
// the threshold included, zero entries never selected. All-zero duals yield an
// empty selection with the degenerate flag set.
struct DualSensitivityReport {
  std::size_t total = 0;
  std::size_t zero_count = 0;
  std::size_t selected_count = 0;
  double quantile = 0.0;
  double threshold = 0.0;
  bool degenerate = false;
  std::vector<DualHistogramBin> bins;  // bins[0] is the exact-zero bin
  std::vector<PrevalenceRow> prevalence;

  void write_histogram_csv(std::ostream& out) const;
  void write_prevalence_csv(std::ostream& out) const;
};

DualSensitivityReport dual_sensitivity_report(const std::vector<double>& lambda,
                                              const SampleSet& set,
                                              const ColumnMetadata& meta,
                                              double quantile,
                                              std::size_t num_bins = 10);

}  // namespace pacc
