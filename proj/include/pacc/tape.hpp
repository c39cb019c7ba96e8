#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "pacc/array.hpp"

namespace pacc {

// Reverse-mode autodiff tape over dense arrays. One tape per evaluation:
// build the expression bottom-up, call backward() on a scalar node, then read
// adjoints of the inputs. Nodes are array-valued (a whole batch forward is a
// handful of nodes), all reductions run in fixed order, so repeated
// evaluation at identical inputs is bit-identical.
//
// Every op validates operand shapes and checks its result for NaN/Inf,
// throwing NumericError that names the op.
class Tape {
 public:
  using Id = std::uint32_t;

  Id leaf(NumArray value);
  // Same as leaf; named for call-site clarity when the value is data, not a
  // differentiation target.
  Id constant(NumArray value);

  Id add(Id a, Id b);                          // elementwise, same shape
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);                          // elementwise product
  Id affine(Id a, double scale, double shift); // scale*x + shift
  Id matmul(Id a, Id b);                       // (n,k) x (k,m) -> (n,m)
  Id add_row(Id m, Id row);                    // broadcast row over matrix rows
  Id slice(Id v, std::size_t offset, std::size_t len);  // rank-1 sub-range
  Id reshape(Id a, std::vector<std::size_t> shape);
  Id sigmoid(Id a);
  Id relu(Id a);
  Id softmax_rows(Id a);                       // rows to strictly-positive simplexes

  // Per-row losses; produce a rank-1 vector of length nrows. floor guards the
  // log argument; with clamp the value is limited to [0, bound] and the
  // gradient is zero on the clamped region.
  Id nll_rows(Id probs, std::vector<int> labels, double floor, double bound,
              bool clamp);
  Id kl_rows(Id p, Id q, double floor, double bound, bool clamp);
  Id sqerr_rows(Id pred, std::vector<double> targets, double bound, bool clamp);

  Id sum(Id v);
  Id mean(Id v);
  Id weighted_sum(Id v, NumArray weights);     // sum_i w[i] * v[i], w constant

  const NumArray& value(Id id) const;
  void backward(Id output);                    // output must be scalar
  const NumArray& adjoint(Id id) const;        // valid after backward()
  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    Leaf, Add, Sub, Mul, Affine, MatMul, AddRow, Slice, Reshape,
    Sigmoid, Relu, SoftmaxRows, NllRows, KlRows, SqErrRows,
    Sum, Mean, WeightedSum,
  };

  struct LossAux {
    std::vector<int> labels;
    std::vector<double> targets;
    double floor = 0.0;
    double bound = 0.0;
    bool clamp = false;
  };
  struct SliceAux { std::size_t offset = 0, len = 0; };
  struct AffineAux { double scale = 1.0, shift = 0.0; };
  struct WeightAux { NumArray weights; };

  struct Node {
    Op op;
    Id a = 0, b = 0;
    NumArray value;
    NumArray adjoint;
    std::variant<std::monostate, LossAux, SliceAux, AffineAux, WeightAux> aux;
  };

  Id push(Op op, Id a, Id b, NumArray value,
          std::variant<std::monostate, LossAux, SliceAux, AffineAux, WeightAux>
              aux = {});
  const Node& node(Id id) const;
  static const char* op_name(Op op);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// Builds a scalar node from the theta leaf; evaluated on a fresh tape per
// call, so expressions may capture whatever data they need.
using ScalarExpr = std::function<Tape::Id(Tape&, Tape::Id)>;

double eval_expr(const ScalarExpr& f, const NumArray& theta);
NumArray grad(const ScalarExpr& f, const NumArray& theta);

// Central differences, evaluation-only; the reference oracle for grad().
NumArray finite_diff_grad(const ScalarExpr& f, const NumArray& theta,
                          double step);
NumArray finite_diff_grad(const std::function<double(const NumArray&)>& f,
                          const NumArray& theta, double step);

}  // namespace pacc
