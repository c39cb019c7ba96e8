#include "pacc/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "pacc/errors.hpp"
#include "pacc/rng.hpp"

namespace pacc {

void Problem::validate() const {
  model.validate();
  objective.validate();
  if (!objective.differentiable()) {
    throw ConfigError("Problem: objective loss must be differentiable");
  }
  if (objective.pairwise()) {
    throw ConfigError("Problem: objective loss cannot be pairwise");
  }
  const bool simplex_out = model.output_map == OutputMap::Softmax;
  if ((objective.kind == LossKind::Nll) && !simplex_out) {
    throw ConfigError("Problem: nll objective needs a softmax output");
  }
  train.validate(model.output_dim);
  if (train.size() == 0) throw DataError("Problem: empty training set");
  if (train.features.cols() != model.input_dim) {
    throw ShapeError("Problem: training features have dim " +
                     std::to_string(train.features.cols()) + ", model expects " +
                     std::to_string(model.input_dim));
  }
  for (const ConstraintSpec& spec : constraints) {
    spec.validate();
    if ((spec.loss.kind == LossKind::Nll ||
         spec.loss.kind == LossKind::KlInvariance) &&
        !simplex_out) {
      throw ConfigError("Problem: constraint '" + spec.id +
                        "' needs a softmax output");
    }
    if (!spec.loss.differentiable()) {
      throw ConfigError("Problem: constraint '" + spec.id +
                        "' loss must be differentiable for training");
    }
    if (spec.source.base.features.cols() != model.input_dim) {
      throw ShapeError("Problem: constraint '" + spec.id +
                       "' features dim mismatch");
    }
  }
}

void SolverConfig::validate() const {
  if (!(primal_step > 0.0)) throw ConfigError("SolverConfig: primal_step must be positive");
  if (!(dual_step > 0.0)) throw ConfigError("SolverConfig: dual_step must be positive");
  if (oracle_budget < 1) throw ConfigError("SolverConfig: oracle_budget must be >= 1");
  if (outer_iterations < 1) throw ConfigError("SolverConfig: outer_iterations must be >= 1");
  if (batch_size < 1) throw ConfigError("SolverConfig: batch_size must be >= 1");
  if (!(dual_cap > 0.0)) throw ConfigError("SolverConfig: dual_cap must be positive");
}

namespace {

struct DualIndex {
  // Per constraint: position into DualState.mu (average) or .lambda (pointwise).
  std::vector<std::size_t> slot;
};

DualIndex index_duals(const std::vector<ConstraintSpec>& specs) {
  DualIndex idx;
  std::size_t nmu = 0, nlam = 0;
  for (const auto& spec : specs) {
    idx.slot.push_back(spec.kind == ConstraintKind::Average ? nmu++ : nlam++);
  }
  return idx;
}

void check_duals_match(const Problem& problem, const DualState& duals) {
  std::size_t nmu = 0, nlam = 0;
  for (const auto& spec : problem.constraints) {
    (spec.kind == ConstraintKind::Average ? nmu : nlam)++;
  }
  if (duals.mu.size() != nmu || duals.lambda.size() != nlam) {
    throw ShapeError("duals do not match the constraint list");
  }
}

// Per-sample loss vector node for one constraint over the given rows.
Tape::Id constraint_rows_graph(Tape& tape, const ConstraintSpec& spec,
                               Tape::Id theta, const ModelSpec& model,
                               const SampleSet& base, const SampleSet& resolved) {
  if (spec.pairing == Pairing::InvariancePair) {
    const Tape::Id p = model_graph(tape, model, theta, tape.constant(base.features));
    const Tape::Id q =
        model_graph(tape, model, theta, tape.constant(resolved.features));
    return loss_rows_pair_graph(tape, spec.loss, p, q);
  }
  const Tape::Id p =
      model_graph(tape, model, theta, tape.constant(resolved.features));
  return loss_rows_graph(tape, spec.loss, p, resolved.labels);
}

// Full or batched Lagrangian. For batched evaluation the index lists select
// rows; the pointwise dual weights follow the selected rows, and batch sums
// are scaled to unbiased estimates of the full terms.
Tape::Id lagrangian_graph_impl(Tape& tape, const Problem& problem,
                               Tape::Id theta, const DualState& duals,
                               const std::vector<SampleSet>& resolved,
                               const std::vector<std::size_t>* obj_rows,
                               const std::vector<std::vector<std::size_t>>* con_rows) {
  const DualIndex idx = index_duals(problem.constraints);

  SampleSet obj_batch;
  const SampleSet* obj = &problem.train;
  if (obj_rows != nullptr) {
    obj_batch = problem.train.rows(*obj_rows);
    obj = &obj_batch;
  }
  const Tape::Id obj_out =
      model_graph(tape, problem.model, theta, tape.constant(obj->features));
  Tape::Id total =
      tape.mean(loss_rows_graph(tape, problem.objective, obj_out, obj->labels));

  for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
    const ConstraintSpec& spec = problem.constraints[k];
    SampleSet base_batch, res_batch;
    const SampleSet* base = &spec.source.base;
    const SampleSet* res = &resolved[k];
    const std::vector<std::size_t>* rows =
        con_rows != nullptr ? &(*con_rows)[k] : nullptr;
    if (rows != nullptr) {
      base_batch = spec.source.base.rows(*rows);
      res_batch = resolved[k].rows(*rows);
      base = &base_batch;
      res = &res_batch;
    }
    const Tape::Id losses =
        constraint_rows_graph(tape, spec, theta, problem.model, *base, *res);
    const std::size_t nb = base->size();

    if (spec.kind == ConstraintKind::Average) {
      const double mu = duals.mu[idx.slot[k]];
      total = tape.add(total, tape.affine(tape.mean(losses), mu,
                                          -mu * spec.threshold));
    } else {
      const std::vector<double>& lam = duals.lambda[idx.slot[k]];
      std::vector<double> w(nb);
      double lam_sum = 0.0;
      for (std::size_t i = 0; i < nb; ++i) {
        const double l = rows != nullptr ? lam[(*rows)[i]] : lam[i];
        w[i] = l / static_cast<double>(nb);
        lam_sum += l;
      }
      const double shift = -spec.threshold * lam_sum / static_cast<double>(nb);
      total = tape.add(total,
                       tape.affine(tape.weighted_sum(losses,
                                                     NumArray::from_vector(std::move(w))),
                                   1.0, shift));
    }
  }
  return total;
}

struct Optimizer {
  PrimalOptimizer kind;
  double step;
  AdamState* adam;

  void apply(NumArray& theta, const NumArray& g) {
    if (kind == PrimalOptimizer::PlainGd) {
      for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= step * g[i];
      return;
    }
    AdamState& st = *adam;
    if (st.m.size() != theta.size()) {
      st.m.assign(theta.size(), 0.0);
      st.v.assign(theta.size(), 0.0);
      st.t = 0;
    }
    ++st.t;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      st.m[i] = b1 * st.m[i] + (1.0 - b1) * g[i];
      st.v[i] = b2 * st.v[i] + (1.0 - b2) * g[i] * g[i];
      theta[i] -= step * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + eps);
    }
  }
};

// Cycles a shuffled index order; reshuffles when fewer than `count` remain.
class IndexStream {
 public:
  IndexStream(std::size_t n, Rng rng) : order_(n), rng_(rng) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    reshuffle();
  }

  std::vector<std::size_t> next(std::size_t count) {
    count = std::min(count, order_.size());
    if (cursor_ + count > order_.size()) reshuffle();
    std::vector<std::size_t> out(order_.begin() + cursor_,
                                 order_.begin() + cursor_ + count);
    cursor_ += count;
    return out;
  }

 private:
  void reshuffle() {
    for (std::size_t i = order_.size(); i > 1; --i) {
      const std::size_t j = rng_.uniform_index(i);
      std::swap(order_[i - 1], order_[j]);
    }
    cursor_ = 0;
  }

  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  Rng rng_;
};

std::vector<double> collect_dual_norms(const Problem& problem,
                                       const DualState& duals) {
  const DualIndex idx = index_duals(problem.constraints);
  std::vector<double> norms;
  for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
    if (problem.constraints[k].kind == ConstraintKind::Average) {
      norms.push_back(duals.mu[idx.slot[k]]);
    } else {
      const auto& lam = duals.lambda[idx.slot[k]];
      double s = 0.0;
      for (double v : lam) s += v;
      norms.push_back(lam.empty() ? 0.0 : s / static_cast<double>(lam.size()));
    }
  }
  return norms;
}

void check_divergence(const Problem& problem, const DualState& duals,
                      double cap, int iteration) {
  const DualIndex idx = index_duals(problem.constraints);
  for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
    const ConstraintSpec& spec = problem.constraints[k];
    double worst = 0.0;
    if (spec.kind == ConstraintKind::Average) {
      worst = duals.mu[idx.slot[k]];
    } else {
      for (double v : duals.lambda[idx.slot[k]]) worst = std::max(worst, v);
    }
    if (worst > cap) {
      throw InfeasibleError(
          "dual variable for constraint '" + spec.id + "' exceeded cap " +
          std::to_string(cap) + " at iteration " + std::to_string(iteration) +
          "; the constraint is likely infeasible");
    }
  }
}

}  // namespace

double empirical_lagrangian(const Problem& problem,
                            const ParameterVector& params,
                            const DualState& duals,
                            const std::vector<SampleSet>& resolved) {
  problem.validate();
  check_duals_match(problem, duals);
  if (resolved.size() != problem.constraints.size()) {
    throw ShapeError("empirical_lagrangian: resolved set count mismatch");
  }
  Tape tape;
  const Tape::Id theta = tape.leaf(params.theta);
  const Tape::Id out =
      lagrangian_graph_impl(tape, problem, theta, duals, resolved, nullptr,
                            nullptr);
  return tape.value(out).scalar_value();
}

Tape::Id lagrangian_graph(Tape& tape, const Problem& problem, Tape::Id theta,
                          const DualState& duals,
                          const std::vector<SampleSet>& resolved) {
  check_duals_match(problem, duals);
  if (resolved.size() != problem.constraints.size()) {
    throw ShapeError("lagrangian_graph: resolved set count mismatch");
  }
  return lagrangian_graph_impl(tape, problem, theta, duals, resolved, nullptr,
                               nullptr);
}

OracleResult primal_oracle(const Problem& problem,
                           const ParameterVector& warm_start,
                           const DualState& duals,
                           const std::vector<SampleSet>& resolved,
                           const SolverConfig& config, OptimizerState* state) {
  problem.validate();
  config.validate();
  check_duals_match(problem, duals);
  if (!duals.nonnegative()) {
    throw ConfigError("primal_oracle: duals must be nonnegative");
  }

  OptimizerState local;
  OptimizerState* st = state != nullptr ? state : &local;
  Optimizer opt{config.primal_optimizer, config.primal_step, &st->adam};

  NumArray theta = warm_start.theta;
  OracleResult best;
  best.params = ParameterVector(problem.model, theta);
  best.lagrangian =
      empirical_lagrangian(problem, best.params, duals, resolved);

  for (int step = 0; step < config.oracle_budget; ++step) {
    Tape tape;
    const Tape::Id t = tape.leaf(theta);
    const Tape::Id out =
        lagrangian_graph_impl(tape, problem, t, duals, resolved, nullptr,
                              nullptr);
    tape.backward(out);
    opt.apply(theta, tape.adjoint(t));
    const ParameterVector cur(problem.model, theta);
    const double value = empirical_lagrangian(problem, cur, duals, resolved);
    if (value < best.lagrangian) {
      best.lagrangian = value;
      best.params = cur;
    }
  }
  return best;
}

DualState dual_ascent_step(const DualState& duals, const SlackReport& slacks,
                           double eta) {
  if (!(eta > 0.0)) throw ConfigError("dual_ascent_step: eta must be positive");
  if (!duals.nonnegative()) {
    throw ConfigError("dual_ascent_step: duals must be nonnegative");
  }
  DualState next = duals;
  std::size_t nmu = 0, nlam = 0;
  for (const SlackEntry& entry : slacks.entries) {
    if (entry.kind == ConstraintKind::Average) {
      if (nmu >= next.mu.size()) {
        throw ShapeError("dual_ascent_step: more average slacks than duals");
      }
      next.mu[nmu] = std::max(0.0, next.mu[nmu] + eta * entry.average);
      ++nmu;
    } else {
      if (nlam >= next.lambda.size()) {
        throw ShapeError("dual_ascent_step: more pointwise slacks than duals");
      }
      std::vector<double>& lam = next.lambda[nlam];
      if (lam.size() != entry.pointwise.size()) {
        throw ShapeError("dual_ascent_step: pointwise slack length mismatch");
      }
      const double scale = eta / static_cast<double>(lam.size());
      for (std::size_t i = 0; i < lam.size(); ++i) {
        lam[i] = std::max(0.0, lam[i] + scale * entry.pointwise[i]);
      }
      ++nlam;
    }
  }
  if (nmu != next.mu.size() || nlam != next.lambda.size()) {
    throw ShapeError("dual_ascent_step: slack report does not cover all duals");
  }
  return next;
}

namespace {

// Adam-flavored ascent on the duals with projection onto the nonnegative
// orthant; the pointwise gradient keeps the 1/N_j scaling of the plain rule.
struct DualAdam {
  AdamState mu_state;
  std::vector<AdamState> lambda_state;

  void step(DualState& duals, const SlackReport& slacks, double eta) {
    std::size_t nmu = 0, nlam = 0;
    if (lambda_state.size() != duals.lambda.size()) {
      lambda_state.resize(duals.lambda.size());
    }
    for (const SlackEntry& entry : slacks.entries) {
      if (entry.kind == ConstraintKind::Average) {
        apply(mu_state, duals.mu, nmu, entry.average, eta, duals.mu.size());
        ++nmu;
      } else {
        std::vector<double>& lam = duals.lambda[nlam];
        AdamState& st = lambda_state[nlam];
        if (st.m.size() != lam.size()) {
          st.m.assign(lam.size(), 0.0);
          st.v.assign(lam.size(), 0.0);
          st.t = 0;
        }
        ++st.t;
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
        const double scale = 1.0 / static_cast<double>(lam.size());
        for (std::size_t i = 0; i < lam.size(); ++i) {
          const double g = entry.pointwise[i] * scale;
          st.m[i] = b1 * st.m[i] + (1.0 - b1) * g;
          st.v[i] = b2 * st.v[i] + (1.0 - b2) * g * g;
          lam[i] = std::max(
              0.0, lam[i] + eta * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + eps));
        }
        ++nlam;
      }
    }
  }

 private:
  void apply(AdamState& st, std::vector<double>& mu, std::size_t i, double g,
             double eta, std::size_t n) {
    if (st.m.size() != n) {
      st.m.assign(n, 0.0);
      st.v.assign(n, 0.0);
      st.t = 0;
    }
    if (i == 0) ++st.t;  // one time step per report
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
    st.m[i] = b1 * st.m[i] + (1.0 - b1) * g;
    st.v[i] = b2 * st.v[i] + (1.0 - b2) * g * g;
    mu[i] = std::max(0.0,
                     mu[i] + eta * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + eps));
  }
};

}  // namespace

TrainResult train(const Problem& problem, const SolverConfig& config) {
  problem.validate();
  config.validate();

  const Rng base(config.seed);
  Rng init_rng = base.derive(1);
  ParameterVector params = init_params(problem.model, config.theta_init, init_rng);
  DualState duals = init_duals(problem.constraints);

  // Resolve every source once up front; adversarial sources are re-resolved
  // against the current parameters on their refresh cadence.
  std::vector<SampleSet> resolved;
  resolved.reserve(problem.constraints.size());
  for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
    const SampleSource& src = problem.constraints[k].source;
    if (src.kind == SampleSource::Kind::Adversarial) {
      Rng seed_rng = base.derive(0xAD0000 + k);
      resolved.push_back(resolve_source(src, &problem.model, &params,
                                        seed_rng.next_u64()));
    } else {
      resolved.push_back(resolve_source(src, nullptr, nullptr, 0));
    }
  }
  const auto refresh_adversarial = [&](int epoch) {
    for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
      const SampleSource& src = problem.constraints[k].source;
      if (src.kind != SampleSource::Kind::Adversarial) continue;
      if ((epoch - 1) % src.refresh_every != 0) continue;
      Rng seed_rng = base.derive(0xAD0000 + k + 4096ULL * static_cast<std::uint64_t>(epoch));
      resolved[k] = resolve_source(src, &problem.model, &params,
                                   seed_rng.next_u64());
    }
  };

  TrainResult result;
  result.report.constraint_ids.reserve(problem.constraints.size());
  for (const auto& spec : problem.constraints) {
    result.report.constraint_ids.push_back(spec.id);
  }
  result.report.s_estimate = problem_s_estimate(problem, &result.report.s_vacuous);

  OptimizerState primal_state;
  DualAdam dual_adam;
  IndexStream obj_stream(problem.train.size(), base.derive(2));
  std::vector<IndexStream> con_streams;
  for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
    con_streams.emplace_back(problem.constraints[k].source.base.size(),
                             base.derive(3 + k));
  }

  for (int iter = 1; iter <= config.outer_iterations; ++iter) {
    const auto started = std::chrono::steady_clock::now();
    if (iter > 1) refresh_adversarial(iter);

    if (config.mode == TrainMode::OraclePerIteration) {
      const OracleResult oracle = primal_oracle(problem, params, duals,
                                                resolved, config, &primal_state);
      params = oracle.params;
    } else {
      const std::size_t n0 = problem.train.size();
      const std::size_t nb =
          (n0 + config.batch_size - 1) / std::max<std::size_t>(config.batch_size, 1);
      Optimizer opt{config.primal_optimizer, config.primal_step,
                    &primal_state.adam};
      for (std::size_t b = 0; b < nb; ++b) {
        const std::vector<std::size_t> obj_rows =
            obj_stream.next(config.batch_size);
        std::vector<std::vector<std::size_t>> con_rows(problem.constraints.size());
        for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
          con_rows[k] = con_streams[k].next(config.batch_size);
        }
        Tape tape;
        const Tape::Id t = tape.leaf(params.theta);
        const Tape::Id out = lagrangian_graph_impl(tape, problem, t, duals,
                                                   resolved, &obj_rows, &con_rows);
        tape.backward(out);
        NumArray theta = params.theta;
        opt.apply(theta, tape.adjoint(t));
        params = ParameterVector(problem.model, std::move(theta));
      }
    }

    const SlackReport slacks =
        eval_slack_report(problem.constraints, problem.model, params, resolved);

    IterationRow row;
    row.iteration = iter;
    row.lagrangian = empirical_lagrangian(problem, params, duals, resolved);
    row.dual_norms = collect_dual_norms(problem, duals);
    for (const SlackEntry& e : slacks.entries) {
      row.average_slacks.push_back(e.average);
      row.violation_fractions.push_back(
          e.kind == ConstraintKind::Pointwise ? e.violation_fraction : 0.0);
    }

    if (config.dual_optimizer == DualOptimizer::ProjectedSubgradient) {
      duals = dual_ascent_step(duals, slacks, config.dual_step);
    } else {
      dual_adam.step(duals, slacks, config.dual_step);
    }
    check_divergence(problem, duals, config.dual_cap, iter);

    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
            .count();
    result.report.rows.push_back(std::move(row));
    result.final_slacks = slacks;
  }

  result.params = params;
  result.duals = duals;
  if (config.reference) {
    const NeighborhoodReference& ref = *config.reference;
    result.report.neighborhood =
        neighborhood_bounds(ref.p_star, ref.rho, ref.beta, config.dual_step,
                            result.report.s_estimate, ref.eps0, ref.eps);
  }
  return result;
}

void ConvergenceReport::write_csv(std::ostream& os) const {
  os << "iteration,lagrangian";
  for (const std::string& id : constraint_ids) os << ",slack." << id;
  for (const std::string& id : constraint_ids) os << ",dual." << id;
  os << "\n";
  char buf[32];
  const auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << ',' << buf;
  };
  for (const IterationRow& row : rows) {
    os << row.iteration;
    emit(row.lagrangian);
    // reuse emit's leading comma for every numeric field
    for (double v : row.average_slacks) emit(v);
    for (double v : row.dual_norms) emit(v);
    os << "\n";
  }
}

double estimate_S(double bound, const std::vector<double>& avg_thresholds,
                  const std::vector<std::pair<double, std::size_t>>& pointwise,
                  bool* vacuous) {
  if (!(bound > 0.0)) throw ConfigError("estimate_S: bound must be positive");
  bool vac = false;
  double s = 0.0;
  for (double c : avg_thresholds) {
    if (bound <= c) vac = true;
    s += (bound - c) * (bound - c);
  }
  for (const auto& [c, n] : pointwise) {
    if (n == 0) throw ConfigError("estimate_S: pointwise count must be positive");
    if (bound <= c) vac = true;
    s += (bound - c) * (bound - c) / static_cast<double>(n);
  }
  if (vacuous != nullptr) *vacuous = vac;
  return s;
}

double problem_s_estimate(const Problem& problem, bool* vacuous) {
  double bound = problem.objective.metadata.bound;
  for (const auto& spec : problem.constraints) {
    bound = std::max(bound, spec.loss.metadata.bound);
  }
  std::vector<double> avg;
  std::vector<std::pair<double, std::size_t>> pw;
  for (const auto& spec : problem.constraints) {
    if (spec.kind == ConstraintKind::Average) {
      avg.push_back(spec.threshold);
    } else {
      pw.emplace_back(spec.threshold, spec.source.base.size());
    }
  }
  return estimate_S(bound, avg, pw, vacuous);
}

std::pair<double, double> neighborhood_bounds(double p_star, double rho,
                                              double beta, double eta,
                                              double s, double eps0,
                                              double eps) {
  if (!(rho >= 0.0)) throw ConfigError("neighborhood_bounds: rho must be >= 0");
  if (!(beta >= 0.0)) throw ConfigError("neighborhood_bounds: beta must be >= 0");
  if (!(eta >= 0.0)) throw ConfigError("neighborhood_bounds: eta must be >= 0");
  if (!(s >= 0.0)) throw ConfigError("neighborhood_bounds: s must be >= 0");
  if (!(eps0 >= 0.0) || !(eps >= 0.0)) {
    throw ConfigError("neighborhood_bounds: eps terms must be >= 0");
  }
  return {p_star - rho - 0.5 * eta * s - beta - eps, p_star + rho + eps0 + eps};
}

double dual_distance_squared(const DualState& a, const DualState& b) {
  if (a.mu.size() != b.mu.size() || a.lambda.size() != b.lambda.size()) {
    throw ShapeError("dual_distance_squared: dual shapes differ");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.mu.size(); ++i) {
    const double d = a.mu[i] - b.mu[i];
    s += d * d;
  }
  for (std::size_t j = 0; j < a.lambda.size(); ++j) {
    if (a.lambda[j].size() != b.lambda[j].size()) {
      throw ShapeError("dual_distance_squared: lambda lengths differ");
    }
    for (std::size_t i = 0; i < a.lambda[j].size(); ++i) {
      const double d = a.lambda[j][i] - b.lambda[j][i];
      s += d * d;
    }
  }
  return s;
}

}  // namespace pacc
