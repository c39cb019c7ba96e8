#include "pacc/constraint.hpp"

#include <algorithm>
#include <cmath>

#include "pacc/errors.hpp"

namespace pacc {

void SampleSource::validate() const {
  base.validate();
  if (base.size() == 0) throw DataError("SampleSource: empty base sample set");
  switch (kind) {
    case Kind::Raw:
      break;
    case Kind::Counterfactual:
      if (!map) throw ConfigError("SampleSource: counterfactual without a map");
      map->validate();
      break;
    case Kind::Adversarial:
      if (!attack) throw ConfigError("SampleSource: adversarial without a config");
      attack->validate();
      if (refresh_every < 1) {
        throw ConfigError("SampleSource: refresh_every must be >= 1");
      }
      break;
  }
}

void ConstraintSpec::validate() const {
  if (id.empty()) throw ConfigError("ConstraintSpec: empty id");
  loss.validate();
  source.validate();
  if (pairing == Pairing::InvariancePair) {
    if (!loss.pairwise()) {
      throw ConfigError("ConstraintSpec '" + id +
                        "': invariance pairing needs a pairwise loss");
    }
    if (source.kind == SampleSource::Kind::Raw) {
      throw ConfigError("ConstraintSpec '" + id +
                        "': invariance pairing needs a transformed source");
    }
  } else if (loss.pairwise()) {
    throw ConfigError("ConstraintSpec '" + id +
                      "': pairwise loss needs invariance pairing");
  }
  if (!std::isfinite(threshold)) {
    throw ConfigError("ConstraintSpec '" + id + "': threshold must be finite");
  }
}

bool DualState::nonnegative() const {
  for (double v : mu) {
    if (v < 0.0) return false;
  }
  for (const auto& l : lambda) {
    for (double v : l) {
      if (v < 0.0) return false;
    }
  }
  return true;
}

double DualState::max_entry() const {
  double m = 0.0;
  for (double v : mu) m = std::max(m, v);
  for (const auto& l : lambda) {
    for (double v : l) m = std::max(m, v);
  }
  return m;
}

double DualState::mu_l1() const {
  double s = 0.0;
  for (double v : mu) s += std::abs(v);
  return s;
}

double DualState::lambda_l1() const {
  double s = 0.0;
  for (const auto& l : lambda) {
    if (l.empty()) continue;
    double inner = 0.0;
    for (double v : l) inner += std::abs(v);
    s += inner / static_cast<double>(l.size());
  }
  return s;
}

DualState init_duals(const std::vector<ConstraintSpec>& specs) {
  DualState duals;
  for (const ConstraintSpec& spec : specs) {
    spec.validate();
    if (spec.kind == ConstraintKind::Average) {
      duals.mu.push_back(1.0);
    } else {
      duals.lambda.emplace_back(spec.source.base.size(), 1.0);
    }
  }
  return duals;
}

SampleSet resolve_source(const SampleSource& source, const ModelSpec* model,
                         const ParameterVector* params, std::uint64_t seed) {
  source.validate();
  switch (source.kind) {
    case SampleSource::Kind::Raw:
      return source.base;
    case SampleSource::Kind::Counterfactual:
      return counterfactual_set(source.base, *source.map);
    case SampleSource::Kind::Adversarial: {
      if (model == nullptr || params == nullptr) {
        throw ConfigError(
            "resolve_source: adversarial source needs model parameters");
      }
      return attack_set(*model, *params, source.base, *source.attack, seed);
    }
  }
  throw ConfigError("resolve_source: unhandled source kind");
}

std::vector<double> constraint_losses(const ConstraintSpec& spec,
                                      const ModelSpec& model,
                                      const ParameterVector& params,
                                      const SampleSet& resolved) {
  spec.validate();
  if (resolved.size() != spec.source.base.size()) {
    throw ShapeError("constraint_losses: resolved set size mismatch for '" +
                     spec.id + "'");
  }
  if (spec.pairing == Pairing::InvariancePair) {
    const NumArray p = forward_batch(model, params, spec.source.base.features);
    const NumArray q = forward_batch(model, params, resolved.features);
    return loss_rows_pair(spec.loss, p, q);
  }
  const NumArray p = forward_batch(model, params, resolved.features);
  return loss_rows(spec.loss, p, resolved.labels);
}

SlackEntry eval_slack_resolved(const ConstraintSpec& spec,
                               const ModelSpec& model,
                               const ParameterVector& params,
                               const SampleSet& resolved) {
  const std::vector<double> losses =
      constraint_losses(spec, model, params, resolved);
  SlackEntry entry;
  entry.id = spec.id;
  entry.kind = spec.kind;
  double sum = 0.0;
  std::size_t violated = 0;
  for (double l : losses) {
    sum += l;
    if (l - spec.threshold > 0.0) ++violated;  // strict: exactly-met is not a violation
  }
  entry.average = sum / static_cast<double>(losses.size()) - spec.threshold;
  entry.violation_fraction =
      static_cast<double>(violated) / static_cast<double>(losses.size());
  if (spec.kind == ConstraintKind::Pointwise) {
    entry.pointwise.resize(losses.size());
    for (std::size_t i = 0; i < losses.size(); ++i) {
      entry.pointwise[i] = losses[i] - spec.threshold;
    }
  }
  return entry;
}

SlackEntry eval_slack(const ConstraintSpec& spec, const ModelSpec& model,
                      const ParameterVector& params, std::uint64_t seed) {
  const SampleSet resolved = resolve_source(spec.source, &model, &params, seed);
  return eval_slack_resolved(spec, model, params, resolved);
}

SlackReport eval_slack_report(const std::vector<ConstraintSpec>& specs,
                              const ModelSpec& model,
                              const ParameterVector& params,
                              const std::vector<SampleSet>& resolved) {
  if (specs.size() != resolved.size()) {
    throw ShapeError("eval_slack_report: specs/resolved size mismatch");
  }
  SlackReport report;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    report.entries.push_back(
        eval_slack_resolved(specs[i], model, params, resolved[i]));
  }
  return report;
}

}  // namespace pacc
