#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pacc/constraint.hpp"
#include "pacc/dataset.hpp"
#include "pacc/loss.hpp"
#include "pacc/model.hpp"
#include "pacc/perturb.hpp"
#include "pacc/solver.hpp"

namespace pacc {

// One constraint as configured, before the dataset is loaded. Counterfactual
// sources name an original (pre-encoding) protected column; the encoded
// column group is resolved against the loaded metadata.
struct ConstraintConf {
  std::string id;
  ConstraintKind kind = ConstraintKind::Pointwise;
  LossSpec loss;
  double threshold = 0.0;

  SampleSource::Kind source = SampleSource::Kind::Raw;

  // Counterfactual sources.
  std::string column;
  CounterfactualMap::Rule rule = CounterfactualMap::Rule::BinarySwap;
  std::vector<std::size_t> permutation;
  bool strict = true;

  // Adversarial sources.
  EpsilonPrior prior;
  int attack_steps = 5;
  StepSize attack_step;
  int attack_restarts = 1;
  int refresh_every = 1;
};

// Post-training evaluation: robustness sweep, sensitivity, dual report,
// certification tolerance.
struct EvaluationConfig {
  std::vector<double> attack_grid;
  int attack_steps = 50;
  StepSize attack_step{StepSize::Kind::RatioOfEpsilon, 1.0 / 30.0};
  int attack_restarts = 10;
  std::string sensitivity_column;  // empty: first protected categorical column
  std::string report_constraint;   // empty: first pointwise constraint
  double report_quantile = 0.2;
  std::size_t histogram_bins = 10;
  double certify_epsilon = 0.1;

  AdversarialConfig eval_attack(double epsilon) const;
};

struct OutputPaths {
  std::string dir = "out";
  std::string metrics = "metrics.json";
  std::string trace = "trace.csv";
  std::string model = "model.json";
  std::string histogram = "dual_histogram.csv";
  std::string prevalence = "dual_prevalence.csv";
  std::string sweep = "robust_sweep.csv";
  std::string certificate = "certificate.json";

  std::string path(const std::string& file) const;
};

struct RunConfig {
  std::string dataset_path;
  DatasetSchema schema;
  std::array<double, 3> fractions{{0.8, 0.0, 0.2}};
  std::uint64_t split_seed = 0;
  ModelSpec model;  // input/output dims of 0 are inferred from the data
  LossSpec objective;
  std::vector<ConstraintConf> constraints;
  SolverConfig solver;
  EvaluationConfig evaluation;
  OutputPaths outputs;
};

// Parses the versioned JSON document (config_version 1). Unknown keys are
// config errors naming the offending path. base_dir anchors relative dataset
// and schema paths.
RunConfig parse_run_config_text(const std::string& json_text, const std::string& base_dir);

// Loads a config file, applies --set overrides (dotted.path=value, value
// parsed as JSON when possible, else taken as a string), then lets the
// PACC_SEED environment variable override solver.seed.
RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides = {});

DatasetSchema parse_schema_text(const std::string& json_text);

// Maps a configured counterfactual constraint onto encoded column indices.
CounterfactualMap resolve_counterfactual(const ColumnMetadata& meta,
                                         const ConstraintConf& conf);

ConstraintSpec build_constraint(const ConstraintConf& conf, const SampleSet& train,
                                const ColumnMetadata& meta);

// Assembles the training problem; fills inferred model dimensions in place.
Problem build_problem(RunConfig& config, const SampleSet& train,
                      const ColumnMetadata& meta, std::size_t num_classes);

void save_model_json(const std::string& path, const ModelSpec& spec,
                     const ParameterVector& params);
struct SavedModel {
  ModelSpec spec;
  ParameterVector params;
};
SavedModel load_model_json(const std::string& path);

}  // namespace pacc
