#pragma once

#include <string>
#include <vector>

#include "pacc/array.hpp"
#include "pacc/tape.hpp"

namespace pacc {

// Probability floors applied inside logs. The NLL floor only guards against
// overflow in the -1/p adjoint, so it sits near the double underflow edge;
// anything stricter flattens the gradient of confidently wrong predictions
// and the optimizer abandons them. The clamp bound, not the floor, is the
// intended cap on a point's loss.
inline constexpr double kNllProbFloor = 1e-290;
inline constexpr double kKlProbFloor = 1e-12;

enum class LossKind { Nll, KlInvariance, ZeroOne, SquaredError };

// B: upper bound the clamp enforces (boundedness assumption the duals' growth
// analysis needs). M: Lipschitz constant carried for near-optimality
// estimates; metadata only, never enforced.
struct LossMetadata {
  double bound = 10.0;
  double lipschitz = 1.0;
};

struct LossSpec {
  LossKind kind = LossKind::Nll;
  LossMetadata metadata;
  bool clamp = true;

  void validate() const;
  bool pairwise() const { return kind == LossKind::KlInvariance; }
  bool differentiable() const { return kind != LossKind::ZeroOne; }
};

const char* loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);

// Scalar losses on a single model output. p (and q) are simplex-valued
// outputs for Nll/KlInvariance; for SquaredError p is the raw prediction.
double nll_loss(const NumArray& p, int label, double bound = 10.0,
                bool clamp = true);
double kl_div(const NumArray& p, const NumArray& q, double bound = 10.0,
              bool clamp = true);
// Evaluation-only. Prediction is argmax(p), ties resolved to the smallest
// index; returns 1 on mismatch.
double zero_one(const NumArray& p, int label);
double squared_error(const NumArray& p, double target, double bound = 10.0,
                     bool clamp = true);

// Per-row losses over batched outputs P (n,k). KlInvariance uses the paired
// overload; ZeroOne is legal here (evaluation paths), just not on the tape.
std::vector<double> loss_rows(const LossSpec& loss, const NumArray& probs,
                              const std::vector<int>& labels);
std::vector<double> loss_rows_pair(const LossSpec& loss, const NumArray& p,
                                   const NumArray& q);

// Tape builders for the differentiable kinds; ZeroOne throws ConfigError.
Tape::Id loss_rows_graph(Tape& tape, const LossSpec& loss, Tape::Id probs,
                         const std::vector<int>& labels);
Tape::Id loss_rows_pair_graph(Tape& tape, const LossSpec& loss, Tape::Id p,
                              Tape::Id q);

}  // namespace pacc
