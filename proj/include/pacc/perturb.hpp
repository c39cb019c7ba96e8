#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pacc/loss.hpp"
#include "pacc/model.hpp"
#include "pacc/rng.hpp"
#include "pacc/sample.hpp"

namespace pacc {

// Deterministic rewrite of a protected attribute's encoded columns.
struct CounterfactualMap {
  enum class Rule { BinarySwap, OneHotPermute };

  std::vector<std::size_t> columns;       // encoded column group, in order
  Rule rule = Rule::BinarySwap;
  std::vector<std::size_t> permutation;   // OneHotPermute: dest i <- src perm[i]
  bool strict = false;                    // validate exactly-one-hot rows

  void validate() const;
};

// x with the protected columns rewritten; everything else untouched.
NumArray counterfactual(const NumArray& x, const CounterfactualMap& map);
SampleSet counterfactual_set(const SampleSet& set, const CounterfactualMap& map);

// Per-sample attack radius: fixed, or scaled Beta for the heterogeneous
// threat model (epsilon ~ scale * Beta(a, b)).
struct EpsilonPrior {
  enum class Kind { Fixed, ScaledBeta };
  Kind kind = Kind::Fixed;
  double value = 0.1;   // Fixed
  double a = 3.0, b = 8.0, scale = 0.25;  // ScaledBeta

  void validate() const;
};

double sample_epsilon(const EpsilonPrior& prior, Rng& rng);

// PGD step size, either absolute or as a fraction of the attack radius.
struct StepSize {
  enum class Kind { Absolute, RatioOfEpsilon };
  Kind kind = Kind::RatioOfEpsilon;
  double value = 1.0 / 3.0;

  double resolve(double epsilon) const {
    return kind == Kind::Absolute ? value : value * epsilon;
  }
};

struct AdversarialConfig {
  EpsilonPrior prior;
  int steps = 5;
  StepSize step;
  int restarts = 1;            // number of attack runs per sample
  double box_low = 0.0;        // input box, uniform across features
  double box_high = 1.0;
  // Unset: random starts exactly when restarts > 1.
  std::optional<bool> random_start;

  bool use_random_start() const {
    return random_start.value_or(restarts > 1);
  }
  void validate() const;

  // Weak attack used inside training loops: 5 steps at eps/3, single run.
  static AdversarialConfig training_defaults(double epsilon);
  // Evaluation attack: 50 steps at eps/30, 10 random restarts.
  static AdversarialConfig evaluation_defaults(double epsilon);
};

// Sign-gradient ascent on the sample's objective loss inside the epsilon-ball
// around x intersected with the box. Returns the candidate with the highest
// loss; the clean x is always among the candidates, so the attack never
// reports a point weaker than no attack. sign(0) = 0.
NumArray pgd_attack(const ModelSpec& model, const ParameterVector& params,
                    const NumArray& x, int label, double epsilon,
                    const AdversarialConfig& config, Rng& rng,
                    const LossSpec& objective = LossSpec{});

// Whole-set attack. Per-sample radii are drawn from the prior with rng
// streams derived per sample index, so results match per-sample calls and do
// not depend on batching. Returns the perturbed set (labels preserved).
SampleSet attack_set(const ModelSpec& model, const ParameterVector& params,
                     const SampleSet& set, const AdversarialConfig& config,
                     std::uint64_t seed, const LossSpec& objective = LossSpec{});

}  // namespace pacc
