#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pacc/constraint.hpp"
#include "pacc/loss.hpp"
#include "pacc/model.hpp"
#include "pacc/sample.hpp"

namespace pacc {

// Objective plus constraints over a training set.
struct Problem {
  ModelSpec model;
  LossSpec objective;
  SampleSet train;
  std::vector<ConstraintSpec> constraints;

  void validate() const;
};

enum class PrimalOptimizer { PlainGd, AdaptiveMoment };
enum class DualOptimizer { ProjectedSubgradient, AdaptiveMoment };

// OraclePerIteration: each outer iteration runs the primal oracle to
// (approximate) convergence against fixed duals, then one dual ascent step.
// Alternating: one primal step per batch, one dual step per epoch.
enum class TrainMode { OraclePerIteration, Alternating };

// Inputs for the post-hoc duality-neighborhood interval; supplied by a caller
// that has an independent estimate of the optimum.
struct NeighborhoodReference {
  double p_star = 0.0;
  double rho = 0.0;    // primal oracle gap
  double beta = 0.0;   // ascent slack tolerance
  double eps0 = 0.0;   // near-optimality offset
  double eps = 0.0;    // estimation slack
};

struct SolverConfig {
  TrainMode mode = TrainMode::OraclePerIteration;
  PrimalOptimizer primal_optimizer = PrimalOptimizer::AdaptiveMoment;
  DualOptimizer dual_optimizer = DualOptimizer::ProjectedSubgradient;
  double primal_step = 0.1;
  double dual_step = 0.01;        // the ascent step eta
  int oracle_budget = 50;         // primal steps per oracle call
  int outer_iterations = 100;     // dual steps (epochs in Alternating mode)
  std::size_t batch_size = 128;   // Alternating mode
  std::uint64_t seed = 0;
  double dual_cap = 1e6;          // divergence guard
  ThetaInit theta_init = ThetaInit::ScaledUniform;
  std::optional<NeighborhoodReference> reference;

  void validate() const;
};

// Empirical Lagrangian: objective mean over the training set, plus
// mu_i * (mean_i - c_i) per average constraint, plus
// (1/N_j) * sum_n lambda_{j,n} * (loss_{j,n} - c_j) per pointwise constraint.
double empirical_lagrangian(const Problem& problem,
                            const ParameterVector& params,
                            const DualState& duals,
                            const std::vector<SampleSet>& resolved);

Tape::Id lagrangian_graph(Tape& tape, const Problem& problem, Tape::Id theta,
                          const DualState& duals,
                          const std::vector<SampleSet>& resolved);

struct AdamState {
  std::vector<double> m, v;
  long long t = 0;
};

struct OptimizerState {
  AdamState adam;
};

struct OracleResult {
  ParameterVector params;
  double lagrangian = 0.0;  // best value seen, including the warm start
};

// Budgeted minimization of the Lagrangian at fixed duals; returns the best
// iterate by Lagrangian value. Passing state carries Adam moments across
// calls (warm continuation).
OracleResult primal_oracle(const Problem& problem,
                           const ParameterVector& warm_start,
                           const DualState& duals,
                           const std::vector<SampleSet>& resolved,
                           const SolverConfig& config,
                           OptimizerState* state = nullptr);

// One projected subgradient ascent step:
//   mu_i     <- [mu_i + eta * avg_slack_i]+
//   lambda_n <- [lambda_n + (eta / N_j) * slack_n]+
DualState dual_ascent_step(const DualState& duals, const SlackReport& slacks,
                           double eta);

struct IterationRow {
  int iteration = 0;
  double lagrangian = 0.0;
  std::vector<double> average_slacks;       // one per constraint
  std::vector<double> dual_norms;           // mu_i, or (1/N)||lambda||_1
  std::vector<double> violation_fractions;  // pointwise constraints; 0 for average
  double wall_seconds = 0.0;                // in-memory only, never serialized
};

struct ConvergenceReport {
  std::vector<std::string> constraint_ids;
  std::vector<IterationRow> rows;
  double s_estimate = 0.0;
  bool s_vacuous = false;
  std::optional<std::pair<double, double>> neighborhood;

  // iteration, lagrangian, slack.<id>..., dual.<id>... Wall-clock stays out
  // so equal seeds give byte-identical streams.
  void write_csv(std::ostream& os) const;
};

struct TrainResult {
  ParameterVector params;
  DualState duals;
  SlackReport final_slacks;
  ConvergenceReport report;
};

TrainResult train(const Problem& problem, const SolverConfig& config);

// S = sum_i (B - c_i)^2 + sum_j (1/N_j) (B - c_j)^2, the slack-energy term of
// the dual-ascent neighborhood. B <= some threshold makes the bound vacuous;
// the value is still returned and *vacuous set when provided.
double estimate_S(double bound, const std::vector<double>& avg_thresholds,
                  const std::vector<std::pair<double, std::size_t>>& pointwise,
                  bool* vacuous = nullptr);

// S for a problem, using the largest loss bound among objective/constraints.
double problem_s_estimate(const Problem& problem, bool* vacuous = nullptr);

// [p_star - rho - (eta/2) s - beta - eps, p_star + rho + eps0 + eps]
std::pair<double, double> neighborhood_bounds(double p_star, double rho,
                                              double beta, double eta,
                                              double s, double eps0,
                                              double eps);

// ||mu - mu_ref||^2 + sum_j ||lambda_j - lambda_ref_j||^2; diagnostic distance
// to a caller-supplied reference dual point.
double dual_distance_squared(const DualState& a, const DualState& b);

}  // namespace pacc
