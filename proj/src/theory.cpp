#include "pacc/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pacc/errors.hpp"

namespace pacc {

void PaccQuery::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("PaccQuery: epsilon must be positive");
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw ConfigError("PaccQuery: delta must be in (0, 1)");
  }
  if (!(vc_dim > 0.0)) throw ConfigError("PaccQuery: vc_dim must be positive");
  if (!(constant > 0.0)) throw ConfigError("PaccQuery: constant must be positive");
  if (num_average < 0 || num_pointwise < 0) {
    throw ConfigError("PaccQuery: constraint counts must be >= 0");
  }
}

long long sample_complexity(const PaccQuery& query) {
  query.validate();
  const double raw = query.constant *
                     (query.vc_dim + std::log(1.0 / query.delta)) /
                     (query.epsilon * query.epsilon);
  if (!(raw < 9.0e18)) throw NumericError("sample_complexity: result overflows");
  return static_cast<long long>(std::ceil(raw));
}

double zeta_bound(std::size_t n, double delta, double vc_dim, int m, int q) {
  if (n == 0) throw ConfigError("zeta_bound: n must be positive");
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw ConfigError("zeta_bound: delta must be in (0, 1)");
  }
  if (!(vc_dim > 0.0)) throw ConfigError("zeta_bound: vc_dim must be positive");
  if (m < 0 || q < 0) throw ConfigError("zeta_bound: counts must be >= 0");
  const double log_term = std::log(4.0 * static_cast<double>(m + q + 2) / delta) +
                          vc_dim * std::log(2.0 * static_cast<double>(n));
  return std::sqrt((1.0 + log_term) / static_cast<double>(n));
}

namespace {

std::vector<double> hypothesis_losses(
    const std::function<NumArray(const NumArray&)>& h,
    const ConstraintSpec& spec, const SampleSet& resolved) {
  const SampleSet& base = spec.source.base;
  const std::size_t n = resolved.size();
  const std::size_t d = resolved.features.cols();
  std::vector<double> losses(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = resolved.features.values().data() + i * d;
    const NumArray out = h(NumArray({d}, std::vector<double>(row, row + d)));
    if (spec.pairing == Pairing::InvariancePair) {
      const double* brow = base.features.values().data() + i * d;
      const NumArray bout = h(NumArray({d}, std::vector<double>(brow, brow + d)));
      losses[i] = kl_div(bout, out, spec.loss.metadata.bound, spec.loss.clamp);
    } else {
      switch (spec.loss.kind) {
        case LossKind::Nll:
          losses[i] = nll_loss(out, resolved.labels[i],
                               spec.loss.metadata.bound, spec.loss.clamp);
          break;
        case LossKind::ZeroOne:
          losses[i] = zero_one(out, resolved.labels[i]);
          break;
        case LossKind::SquaredError:
          losses[i] = squared_error(out, resolved.labels[i],
                                    spec.loss.metadata.bound, spec.loss.clamp);
          break;
        case LossKind::KlInvariance:
          throw ConfigError("ecrm: kl loss without invariance pairing");
      }
    }
  }
  return losses;
}

}  // namespace

EcrmResult ecrm_bruteforce(const FiniteHypothesisClass& hclass,
                           const LossSpec& objective,
                           const std::vector<ConstraintSpec>& constraints,
                           const SampleSet& data) {
  if (hclass.hypotheses.empty()) {
    throw ConfigError("ecrm_bruteforce: empty hypothesis class");
  }
  objective.validate();
  data.validate();
  if (data.size() == 0) throw DataError("ecrm_bruteforce: empty data");

  std::vector<SampleSet> resolved;
  for (const ConstraintSpec& spec : constraints) {
    spec.validate();
    if (spec.source.kind == SampleSource::Kind::Adversarial) {
      throw ConfigError(
          "ecrm_bruteforce: adversarial sources need a parametrized model");
    }
    resolved.push_back(resolve_source(spec.source, nullptr, nullptr, 0));
  }

  const std::size_t d = data.features.cols();
  bool any_feasible = false;
  EcrmResult best;
  std::vector<double> worst_violation(hclass.hypotheses.size(), 0.0);

  for (std::size_t h = 0; h < hclass.hypotheses.size(); ++h) {
    const auto& hyp = hclass.hypotheses[h];

    bool feasible = true;
    for (std::size_t k = 0; k < constraints.size(); ++k) {
      const ConstraintSpec& spec = constraints[k];
      const std::vector<double> losses =
          hypothesis_losses(hyp, spec, resolved[k]);
      if (spec.kind == ConstraintKind::Average) {
        double mean = 0.0;
        for (double l : losses) mean += l;
        mean /= static_cast<double>(losses.size());
        worst_violation[h] = std::max(worst_violation[h], mean - spec.threshold);
        if (mean > spec.threshold) feasible = false;
      } else {
        for (double l : losses) {
          worst_violation[h] = std::max(worst_violation[h], l - spec.threshold);
          if (l > spec.threshold) feasible = false;
        }
      }
    }
    if (!feasible) continue;

    double obj = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double* row = data.features.values().data() + i * d;
      const NumArray out = hyp(NumArray({d}, std::vector<double>(row, row + d)));
      switch (objective.kind) {
        case LossKind::Nll:
          obj += nll_loss(out, data.labels[i], objective.metadata.bound,
                          objective.clamp);
          break;
        case LossKind::ZeroOne:
          obj += zero_one(out, data.labels[i]);
          break;
        case LossKind::SquaredError:
          obj += squared_error(out, data.labels[i], objective.metadata.bound,
                               objective.clamp);
          break;
        case LossKind::KlInvariance:
          throw ConfigError("ecrm_bruteforce: pairwise loss cannot be the objective");
      }
    }
    obj /= static_cast<double>(data.size());

    if (!any_feasible || obj < best.objective) {
      any_feasible = true;
      best.index = h;
      best.objective = obj;
    }
  }

  if (!any_feasible) {
    std::ostringstream msg;
    msg << "ecrm_bruteforce: no feasible hypothesis; worst violations:";
    for (std::size_t h = 0; h < worst_violation.size(); ++h) {
      msg << " [" << h << "] " << worst_violation[h];
    }
    throw InfeasibleError(msg.str());
  }
  return best;
}

PaccCertificate pacc_certificate(const ModelSpec& model,
                                 const ParameterVector& params,
                                 const LossSpec& objective,
                                 const std::vector<ConstraintSpec>& constraints,
                                 const HeldoutData& heldout, double epsilon,
                                 double p_hat, std::uint64_t seed) {
  if (!(epsilon >= 0.0)) {
    throw ConfigError("pacc_certificate: epsilon must be >= 0");
  }
  heldout.objective.validate(model.output_dim);
  if (heldout.objective.size() == 0) {
    throw DataError("pacc_certificate: empty heldout objective set");
  }
  if (heldout.per_constraint.size() != constraints.size()) {
    throw ShapeError("pacc_certificate: heldout set count mismatch");
  }

  PaccCertificate cert;
  cert.epsilon = epsilon;

  const NumArray out = forward_batch(model, params, heldout.objective.features);
  const std::vector<double> obj_losses =
      loss_rows(objective, out, heldout.objective.labels);
  double obj_mean = 0.0;
  for (double l : obj_losses) obj_mean += l;
  obj_mean /= static_cast<double>(obj_losses.size());
  cert.objective.value = obj_mean;
  cert.objective.reference = p_hat;
  cert.objective.pass = obj_mean <= p_hat + epsilon;
  cert.verdict = cert.objective.pass;

  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const ConstraintSpec& spec = constraints[k];
    if (heldout.per_constraint[k].size() == 0) {
      throw DataError("pacc_certificate: empty heldout set for constraint '" +
                      spec.id + "'");
    }
    // Rebuild the source on the heldout base so transforms/attacks apply to
    // unseen rows.
    ConstraintSpec held = spec;
    held.source.base = heldout.per_constraint[k];
    const SampleSet resolved =
        resolve_source(held.source, &model, &params, seed + k);
    const std::vector<double> losses =
        constraint_losses(held, model, params, resolved);

    if (spec.kind == ConstraintKind::Average) {
      double mean = 0.0;
      for (double l : losses) mean += l;
      mean /= static_cast<double>(losses.size());
      CertificateAverage entry;
      entry.id = spec.id;
      entry.mean = mean;
      entry.threshold = spec.threshold;
      entry.pass = mean <= spec.threshold + epsilon;
      cert.verdict = cert.verdict && entry.pass;
      cert.average.push_back(std::move(entry));
    } else {
      std::size_t ok = 0;
      for (double l : losses) {
        if (l <= spec.threshold) ++ok;
      }
      CertificatePointwise entry;
      entry.id = spec.id;
      entry.satisfied_fraction =
          static_cast<double>(ok) / static_cast<double>(losses.size());
      entry.required_fraction = std::max(0.0, 1.0 - epsilon);
      entry.pass = entry.satisfied_fraction >= entry.required_fraction;
      cert.verdict = cert.verdict && entry.pass;
      cert.pointwise.push_back(std::move(entry));
    }
  }
  return cert;
}

namespace {
std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string PaccCertificate::to_json() const {
  std::ostringstream os;
  os << "{\n";
  os << "  \"epsilon\": " << fmt_double(epsilon) << ",\n";
  os << "  \"objective\": {\"value\": " << fmt_double(objective.value)
     << ", \"reference\": " << fmt_double(objective.reference)
     << ", \"pass\": " << (objective.pass ? "true" : "false") << "},\n";
  os << "  \"average\": [";
  for (std::size_t i = 0; i < average.size(); ++i) {
    if (i > 0) os << ", ";
    os << "{\"id\": \"" << average[i].id
       << "\", \"mean\": " << fmt_double(average[i].mean)
       << ", \"threshold\": " << fmt_double(average[i].threshold)
       << ", \"pass\": " << (average[i].pass ? "true" : "false") << "}";
  }
  os << "],\n";
  os << "  \"pointwise\": [";
  for (std::size_t i = 0; i < pointwise.size(); ++i) {
    if (i > 0) os << ", ";
    os << "{\"id\": \"" << pointwise[i].id << "\", \"satisfied_fraction\": "
       << fmt_double(pointwise[i].satisfied_fraction)
       << ", \"required_fraction\": "
       << fmt_double(pointwise[i].required_fraction)
       << ", \"pass\": " << (pointwise[i].pass ? "true" : "false") << "}";
  }
  os << "],\n";
  os << "  \"verdict\": " << (verdict ? "\"pass\"" : "\"fail\"") << "\n";
  os << "}\n";
  return os.str();
}

NearOptimalityEstimate epsilon0_estimate(const DualState& duals,
                                         double lipschitz, double nu) {
  if (!(lipschitz > 0.0)) {
    throw ConfigError("epsilon0_estimate: lipschitz must be positive");
  }
  if (!(nu > 0.0)) throw ConfigError("epsilon0_estimate: nu must be positive");
  if (!duals.nonnegative()) {
    throw ConfigError("epsilon0_estimate: duals must be nonnegative");
  }
  NearOptimalityEstimate est;
  est.mu_l1 = duals.mu_l1();
  est.lambda_l1 = duals.lambda_l1();
  est.epsilon0 = (1.0 + est.mu_l1 + est.lambda_l1) * lipschitz * nu;
  return est;
}

std::vector<SlacknessEntry> comp_slackness_check(const DualState& duals,
                                                 const SlackReport& slacks,
                                                 double tol) {
  if (!(tol >= 0.0)) throw ConfigError("comp_slackness_check: tol must be >= 0");
  std::vector<SlacknessEntry> out;
  std::size_t nmu = 0, nlam = 0;
  for (const SlackEntry& entry : slacks.entries) {
    SlacknessEntry res;
    res.id = entry.id;
    if (entry.kind == ConstraintKind::Average) {
      if (nmu >= duals.mu.size()) {
        throw ShapeError("comp_slackness_check: slack/dual mismatch");
      }
      res.max_product = std::abs(duals.mu[nmu] * entry.average);
      ++nmu;
    } else {
      if (nlam >= duals.lambda.size()) {
        throw ShapeError("comp_slackness_check: slack/dual mismatch");
      }
      const auto& lam = duals.lambda[nlam];
      if (lam.size() != entry.pointwise.size()) {
        throw ShapeError("comp_slackness_check: pointwise length mismatch");
      }
      for (std::size_t i = 0; i < lam.size(); ++i) {
        res.max_product =
            std::max(res.max_product, std::abs(lam[i] * entry.pointwise[i]));
      }
      ++nlam;
    }
    res.pass = res.max_product <= tol;
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace pacc
