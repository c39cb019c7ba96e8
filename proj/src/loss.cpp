#include "pacc/loss.hpp"

#include <algorithm>
#include <cmath>

namespace pacc {

void LossSpec::validate() const {
  if (!(metadata.bound > 0.0)) {
    throw ConfigError("LossSpec: bound must be positive");
  }
  if (!(metadata.lipschitz > 0.0)) {
    throw ConfigError("LossSpec: lipschitz must be positive");
  }
}

const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::Nll: return "nll";
    case LossKind::KlInvariance: return "kl_invariance";
    case LossKind::ZeroOne: return "zero_one";
    case LossKind::SquaredError: return "squared_error";
  }
  return "?";
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "nll") return LossKind::Nll;
  if (name == "kl_invariance") return LossKind::KlInvariance;
  if (name == "zero_one") return LossKind::ZeroOne;
  if (name == "squared_error") return LossKind::SquaredError;
  throw ConfigError("unknown loss kind '" + name + "'");
}

double nll_loss(const NumArray& p, int label, double bound, bool clamp) {
  if (p.rank() != 1) throw ShapeError("nll_loss: p must be rank-1");
  if (label < 0 || static_cast<std::size_t>(label) >= p.size()) {
    throw LabelError("nll_loss: label out of range");
  }
  double v = -std::log(std::max(p[static_cast<std::size_t>(label)],
                                kNllProbFloor));
  if (clamp) v = std::min(std::max(v, 0.0), bound);
  return v;
}

double kl_div(const NumArray& p, const NumArray& q, double bound, bool clamp) {
  if (p.rank() != 1 || !p.same_shape(q)) {
    throw ShapeError("kl_div: p and q must be rank-1 with equal length");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pf = std::max(p[i], kKlProbFloor);
    const double qf = std::max(q[i], kKlProbFloor);
    acc += p[i] * (std::log(pf) - std::log(qf));
  }
  if (clamp) acc = std::min(std::max(acc, 0.0), bound);
  return acc;
}

namespace {
std::size_t argmax_row(const double* row, std::size_t k) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < k; ++j) {
    if (row[j] > row[best]) best = j;  // strict: ties keep the smaller index
  }
  return best;
}
}  // namespace

double zero_one(const NumArray& p, int label) {
  if (p.rank() != 1 || p.size() == 0) throw ShapeError("zero_one: p must be rank-1");
  if (label < 0 || static_cast<std::size_t>(label) >= p.size()) {
    throw LabelError("zero_one: label out of range");
  }
  return argmax_row(p.values().data(), p.size()) ==
                 static_cast<std::size_t>(label)
             ? 0.0
             : 1.0;
}

double squared_error(const NumArray& p, double target, double bound,
                     bool clamp) {
  if (p.size() != 1) throw ShapeError("squared_error: p must have size 1");
  const double d = p[0] - target;
  double v = d * d;
  if (clamp) v = std::min(v, bound);
  return v;
}

std::vector<double> loss_rows(const LossSpec& loss, const NumArray& probs,
                              const std::vector<int>& labels) {
  if (probs.rank() != 2) throw ShapeError("loss_rows: probs must be rank-2");
  const std::size_t n = probs.rows(), k = probs.cols();
  if (labels.size() != n) throw ShapeError("loss_rows: label count mismatch");
  std::vector<double> out(n);
  switch (loss.kind) {
    case LossKind::Nll:
      for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= k) {
          throw LabelError("loss_rows: label out of range at row " +
                           std::to_string(i));
        }
        double v = -std::log(std::max(probs[i * k + y], kNllProbFloor));
        if (loss.clamp) v = std::min(std::max(v, 0.0), loss.metadata.bound);
        out[i] = v;
      }
      return out;
    case LossKind::ZeroOne:
      for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= k) {
          throw LabelError("loss_rows: label out of range at row " +
                           std::to_string(i));
        }
        out[i] = argmax_row(probs.values().data() + i * k, k) ==
                         static_cast<std::size_t>(y)
                     ? 0.0
                     : 1.0;
      }
      return out;
    case LossKind::SquaredError:
      if (k != 1) throw ShapeError("loss_rows: squared_error needs (n,1) output");
      for (std::size_t i = 0; i < n; ++i) {
        const double d = probs[i] - static_cast<double>(labels[i]);
        double v = d * d;
        if (loss.clamp) v = std::min(v, loss.metadata.bound);
        out[i] = v;
      }
      return out;
    case LossKind::KlInvariance:
      throw ConfigError("loss_rows: kl_invariance needs the paired overload");
  }
  throw ConfigError("loss_rows: unhandled loss kind");
}

std::vector<double> loss_rows_pair(const LossSpec& loss, const NumArray& p,
                                   const NumArray& q) {
  if (loss.kind != LossKind::KlInvariance) {
    throw ConfigError("loss_rows_pair: loss is not pairwise");
  }
  if (p.rank() != 2 || !p.same_shape(q)) {
    throw ShapeError("loss_rows_pair: p and q must be rank-2 with equal shape");
  }
  const std::size_t n = p.rows(), k = p.cols();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double pf = std::max(p[i * k + j], kKlProbFloor);
      const double qf = std::max(q[i * k + j], kKlProbFloor);
      acc += p[i * k + j] * (std::log(pf) - std::log(qf));
    }
    if (loss.clamp) acc = std::min(std::max(acc, 0.0), loss.metadata.bound);
    out[i] = acc;
  }
  return out;
}

Tape::Id loss_rows_graph(Tape& tape, const LossSpec& loss, Tape::Id probs,
                         const std::vector<int>& labels) {
  switch (loss.kind) {
    case LossKind::Nll:
      return tape.nll_rows(probs, labels, kNllProbFloor, loss.metadata.bound,
                           loss.clamp);
    case LossKind::SquaredError: {
      std::vector<double> targets(labels.begin(), labels.end());
      return tape.sqerr_rows(probs, std::move(targets), loss.metadata.bound,
                             loss.clamp);
    }
    case LossKind::ZeroOne:
      throw ConfigError("loss_rows_graph: zero_one is not differentiable");
    case LossKind::KlInvariance:
      throw ConfigError("loss_rows_graph: kl_invariance needs the paired overload");
  }
  throw ConfigError("loss_rows_graph: unhandled loss kind");
}

Tape::Id loss_rows_pair_graph(Tape& tape, const LossSpec& loss, Tape::Id p,
                              Tape::Id q) {
  if (loss.kind != LossKind::KlInvariance) {
    throw ConfigError("loss_rows_pair_graph: loss is not pairwise");
  }
  return tape.kl_rows(p, q, kKlProbFloor, loss.metadata.bound, loss.clamp);
}

}  // namespace pacc
