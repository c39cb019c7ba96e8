#include "pacc/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "pacc/errors.hpp"

namespace pacc {

void CounterfactualMap::validate() const {
  if (columns.empty()) {
    throw ConfigError("CounterfactualMap: empty column group");
  }
  for (std::size_t i = 0; i < columns.size(); ++i) {
    for (std::size_t j = i + 1; j < columns.size(); ++j) {
      if (columns[i] == columns[j]) {
        throw ConfigError("CounterfactualMap: duplicate column index");
      }
    }
  }
  if (rule == Rule::BinarySwap) {
    if (columns.size() > 2) {
      throw ConfigError(
          "CounterfactualMap: binary_swap needs a 1- or 2-column group");
    }
  } else {
    if (permutation.size() != columns.size()) {
      throw ConfigError("CounterfactualMap: permutation size mismatch");
    }
    std::vector<bool> seen(columns.size(), false);
    for (std::size_t p : permutation) {
      if (p >= columns.size() || seen[p]) {
        throw ConfigError("CounterfactualMap: not a permutation");
      }
      seen[p] = true;
    }
  }
}

namespace {

void apply_map_row(double* row, std::size_t dim, const CounterfactualMap& map,
                   std::size_t row_index) {
  for (std::size_t c : map.columns) {
    if (c >= dim) throw ConfigError("CounterfactualMap: column out of range");
  }
  if (map.strict) {
    std::size_t hot = 0;
    for (std::size_t c : map.columns) {
      const double v = row[c];
      if (v == 1.0) {
        ++hot;
      } else if (v != 0.0) {
        throw DataError("counterfactual: non-0/1 entry in one-hot group at row " +
                        std::to_string(row_index));
      }
    }
    if (hot != 1) {
      throw DataError("counterfactual: group is not exactly one-hot at row " +
                      std::to_string(row_index));
    }
  }
  if (map.rule == CounterfactualMap::Rule::BinarySwap) {
    if (map.columns.size() == 1) {
      row[map.columns[0]] = 1.0 - row[map.columns[0]];
    } else {
      std::swap(row[map.columns[0]], row[map.columns[1]]);
    }
  } else {
    std::vector<double> src(map.columns.size());
    for (std::size_t i = 0; i < map.columns.size(); ++i) {
      src[i] = row[map.columns[i]];
    }
    for (std::size_t i = 0; i < map.columns.size(); ++i) {
      row[map.columns[i]] = src[map.permutation[i]];
    }
  }
}

}  // namespace

NumArray counterfactual(const NumArray& x, const CounterfactualMap& map) {
  map.validate();
  if (x.rank() != 1) throw ShapeError("counterfactual: x must be rank-1");
  std::vector<double> out(x.values());
  apply_map_row(out.data(), out.size(), map, 0);
  return NumArray::from_vector(std::move(out));
}

SampleSet counterfactual_set(const SampleSet& set, const CounterfactualMap& map) {
  map.validate();
  set.validate();
  std::vector<double> out(set.features.values());
  const std::size_t d = set.features.cols();
  for (std::size_t i = 0; i < set.size(); ++i) {
    apply_map_row(out.data() + i * d, d, map, i);
  }
  SampleSet result;
  result.features = NumArray(set.features.shape(), std::move(out));
  result.labels = set.labels;
  result.source_id = set.source_id + "#counterfactual";
  return result;
}

void EpsilonPrior::validate() const {
  if (kind == Kind::Fixed) {
    if (!(value >= 0.0)) throw ConfigError("EpsilonPrior: fixed value must be >= 0");
  } else {
    if (!(a > 0.0) || !(b > 0.0)) {
      throw ConfigError("EpsilonPrior: beta parameters must be positive");
    }
    if (!(scale > 0.0)) throw ConfigError("EpsilonPrior: scale must be positive");
  }
}

double sample_epsilon(const EpsilonPrior& prior, Rng& rng) {
  prior.validate();
  if (prior.kind == EpsilonPrior::Kind::Fixed) return prior.value;
  return prior.scale * rng.beta(prior.a, prior.b);
}

void AdversarialConfig::validate() const {
  prior.validate();
  if (steps < 1) throw ConfigError("AdversarialConfig: steps must be >= 1");
  if (restarts < 1) throw ConfigError("AdversarialConfig: restarts must be >= 1");
  if (!(step.value > 0.0)) {
    throw ConfigError("AdversarialConfig: step size must be positive");
  }
  if (!(box_low <= box_high)) {
    throw ConfigError("AdversarialConfig: box_low must not exceed box_high");
  }
}

AdversarialConfig AdversarialConfig::training_defaults(double epsilon) {
  AdversarialConfig c;
  c.prior = EpsilonPrior{EpsilonPrior::Kind::Fixed, epsilon, 3.0, 8.0, 0.25};
  c.steps = 5;
  c.step = StepSize{StepSize::Kind::RatioOfEpsilon, 1.0 / 3.0};
  c.restarts = 1;
  return c;
}

AdversarialConfig AdversarialConfig::evaluation_defaults(double epsilon) {
  AdversarialConfig c;
  c.prior = EpsilonPrior{EpsilonPrior::Kind::Fixed, epsilon, 3.0, 8.0, 0.25};
  c.steps = 50;
  c.step = StepSize{StepSize::Kind::RatioOfEpsilon, 1.0 / 30.0};
  c.restarts = 10;
  return c;
}

namespace {

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Per-row gradient of the summed loss w.r.t. the feature matrix. Rows do not
// interact, so this equals d attacked-sample runs in one tape.
NumArray input_gradient(const ModelSpec& model, const ParameterVector& params,
                        const NumArray& features, const std::vector<int>& labels,
                        const LossSpec& objective) {
  Tape tape;
  const Tape::Id x = tape.leaf(features);
  const Tape::Id theta = tape.constant(params.theta);
  const Tape::Id out = model_graph(tape, model, theta, x);
  const Tape::Id losses = loss_rows_graph(tape, objective, out, labels);
  tape.backward(tape.sum(losses));
  return tape.adjoint(x);
}

std::vector<double> row_losses_now(const ModelSpec& model,
                                   const ParameterVector& params,
                                   const NumArray& features,
                                   const std::vector<int>& labels,
                                   const LossSpec& objective) {
  return loss_rows(objective, forward_batch(model, params, features), labels);
}

}  // namespace

// Shared engine: attacks all rows at once. Radii and per-restart noise come
// from per-row rngs, so the result is identical whether rows are attacked
// together or one at a time.
static SampleSet attack_rows(const ModelSpec& model,
                             const ParameterVector& params,
                             const SampleSet& set,
                             const std::vector<double>& epsilons,
                             const AdversarialConfig& config,
                             std::vector<Rng>& row_rngs,
                             const LossSpec& objective) {
  config.validate();
  set.validate(model.output_dim);
  if (!objective.differentiable()) {
    throw ConfigError("pgd_attack: objective loss is not differentiable");
  }
  const std::size_t n = set.size(), d = set.features.cols();
  for (std::size_t i = 0; i < n * d; ++i) {
    const double v = set.features[i];
    if (v < config.box_low || v > config.box_high) {
      throw ConfigError("pgd_attack: sample outside the input box");
    }
  }

  // Per-row clamp ranges: ball around the clean point intersected with box.
  std::vector<double> lo(n * d), hi(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double v = set.features[i * d + j];
      lo[i * d + j] = std::max(v - epsilons[i], config.box_low);
      hi[i * d + j] = std::min(v + epsilons[i], config.box_high);
    }
  }

  std::vector<double> best(set.features.values().begin(),
                           set.features.values().end());
  std::vector<double> best_loss =
      row_losses_now(model, params, set.features, set.labels, objective);

  for (int r = 0; r < config.restarts; ++r) {
    std::vector<double> cur(set.features.values().begin(),
                            set.features.values().end());
    if (config.use_random_start()) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          const double noise = row_rngs[i].uniform(-epsilons[i], epsilons[i]);
          cur[i * d + j] = std::clamp(set.features[i * d + j] + noise,
                                      lo[i * d + j], hi[i * d + j]);
        }
      }
    }
    for (int step = 0; step < config.steps; ++step) {
      const NumArray g = input_gradient(
          model, params, NumArray({n, d}, cur), set.labels, objective);
      for (std::size_t i = 0; i < n; ++i) {
        const double alpha = config.step.resolve(epsilons[i]);
        for (std::size_t j = 0; j < d; ++j) {
          cur[i * d + j] = std::clamp(cur[i * d + j] + alpha * sign0(g[i * d + j]),
                                      lo[i * d + j], hi[i * d + j]);
        }
      }
    }
    const std::vector<double> losses =
        row_losses_now(model, params, NumArray({n, d}, cur), set.labels,
                       objective);
    for (std::size_t i = 0; i < n; ++i) {
      if (losses[i] > best_loss[i]) {
        best_loss[i] = losses[i];
        for (std::size_t j = 0; j < d; ++j) best[i * d + j] = cur[i * d + j];
      }
    }
  }

  SampleSet out;
  out.features = NumArray({n, d}, std::move(best));
  out.labels = set.labels;
  out.source_id = set.source_id + "#adversarial";
  return out;
}

NumArray pgd_attack(const ModelSpec& model, const ParameterVector& params,
                    const NumArray& x, int label, double epsilon,
                    const AdversarialConfig& config, Rng& rng,
                    const LossSpec& objective) {
  if (x.rank() != 1) throw ShapeError("pgd_attack: x must be rank-1");
  if (!(epsilon >= 0.0)) throw ConfigError("pgd_attack: epsilon must be >= 0");
  SampleSet one;
  one.features = NumArray({1, x.size()}, x.values());
  one.labels = {label};
  one.source_id = "single";
  std::vector<Rng> rngs{rng};
  const SampleSet attacked = attack_rows(model, params, one, {epsilon}, config,
                                         rngs, objective);
  rng = rngs[0];  // hand the advanced stream back to the caller
  std::vector<double> row(attacked.features.values());
  return NumArray::from_vector(std::move(row));
}

SampleSet attack_set(const ModelSpec& model, const ParameterVector& params,
                     const SampleSet& set, const AdversarialConfig& config,
                     std::uint64_t seed, const LossSpec& objective) {
  config.validate();
  set.validate(model.output_dim);
  const Rng base(seed);
  std::vector<Rng> row_rngs;
  row_rngs.reserve(set.size());
  std::vector<double> epsilons(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    row_rngs.push_back(base.derive(i));
    epsilons[i] = sample_epsilon(config.prior, row_rngs.back());
  }
  return attack_rows(model, params, set, epsilons, config, row_rngs, objective);
}

}  // namespace pacc
