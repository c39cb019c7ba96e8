#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pacc/loss.hpp"
#include "pacc/model.hpp"
#include "pacc/perturb.hpp"
#include "pacc/sample.hpp"

namespace pacc {

// Where a constraint's samples come from. Raw uses the base set as-is;
// Counterfactual rewrites protected columns; Adversarial re-attacks the base
// set against the current parameters every refresh_every epochs.
struct SampleSource {
  enum class Kind { Raw, Counterfactual, Adversarial };

  Kind kind = Kind::Raw;
  SampleSet base;
  std::optional<CounterfactualMap> map;        // Counterfactual
  std::optional<AdversarialConfig> attack;     // Adversarial
  int refresh_every = 1;                       // epochs between re-attacks

  void validate() const;
};

enum class ConstraintKind { Average, Pointwise };

// None: loss(f(x), y) on the resolved samples. InvariancePair: loss compares
// f on the base row against f on the resolved (transformed) row.
enum class Pairing { None, InvariancePair };

struct ConstraintSpec {
  std::string id;
  ConstraintKind kind = ConstraintKind::Average;
  LossSpec loss;
  double threshold = 0.0;   // the c the slack is measured against
  SampleSource source;
  Pairing pairing = Pairing::None;

  void validate() const;
};

// Dual iterates: one multiplier per average constraint, one vector (length
// N_j) per pointwise constraint, ordered as the specs are.
struct DualState {
  std::vector<double> mu;
  std::vector<std::vector<double>> lambda;

  bool nonnegative() const;
  double max_entry() const;
  double mu_l1() const;
  // sum_j (1/N_j) ||lambda_j||_1, the empirical L1 mass of the pointwise duals
  double lambda_l1() const;
};

// All-ones start, matching the dual iteration's initialization.
DualState init_duals(const std::vector<ConstraintSpec>& specs);

// Materializes the source. model/params are required for Adversarial sources
// (the attack runs against the current parameters) and ignored otherwise.
SampleSet resolve_source(const SampleSource& source, const ModelSpec* model,
                         const ParameterVector* params, std::uint64_t seed);

struct SlackEntry {
  std::string id;
  ConstraintKind kind = ConstraintKind::Average;
  double average = 0.0;               // mean per-sample loss minus threshold
  std::vector<double> pointwise;      // per-sample slacks (Pointwise only)
  double violation_fraction = 0.0;    // share of samples with slack > 0
};

struct SlackReport {
  std::vector<SlackEntry> entries;
};

// Per-sample losses of one constraint at the given parameters, using an
// already-resolved sample set.
std::vector<double> constraint_losses(const ConstraintSpec& spec,
                                      const ModelSpec& model,
                                      const ParameterVector& params,
                                      const SampleSet& resolved);

SlackEntry eval_slack_resolved(const ConstraintSpec& spec,
                               const ModelSpec& model,
                               const ParameterVector& params,
                               const SampleSet& resolved);

// Resolves the source itself (seed feeds adversarial regeneration).
SlackEntry eval_slack(const ConstraintSpec& spec, const ModelSpec& model,
                      const ParameterVector& params, std::uint64_t seed);

SlackReport eval_slack_report(const std::vector<ConstraintSpec>& specs,
                              const ModelSpec& model,
                              const ParameterVector& params,
                              const std::vector<SampleSet>& resolved);

}  // namespace pacc
