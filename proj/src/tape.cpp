#include "pacc/tape.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace pacc {

namespace {

// Shifted logits are clamped here before exp so softmax outputs stay strictly
// positive even for extreme spreads (exp(-700) ~ 1e-304 > 0).
constexpr double kSoftmaxExpFloor = -700.0;

void check_same_shape(const NumArray& a, const NumArray& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": operand shapes differ");
  }
}

}  // namespace

const char* Tape::op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Affine: return "affine";
    case Op::MatMul: return "matmul";
    case Op::AddRow: return "add_row";
    case Op::Slice: return "slice";
    case Op::Reshape: return "reshape";
    case Op::Sigmoid: return "sigmoid";
    case Op::Relu: return "relu";
    case Op::SoftmaxRows: return "softmax_rows";
    case Op::NllRows: return "nll_rows";
    case Op::KlRows: return "kl_rows";
    case Op::SqErrRows: return "sqerr_rows";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
    case Op::WeightedSum: return "weighted_sum";
  }
  return "?";
}

const Tape::Node& Tape::node(Id id) const {
  if (id >= nodes_.size()) throw ShapeError("tape: node id out of range");
  return nodes_[id];
}

Tape::Id Tape::push(
    Op op, Id a, Id b, NumArray value,
    std::variant<std::monostate, LossAux, SliceAux, AffineAux, WeightAux> aux) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by op '") +
                       op_name(op) + "'");
  }
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  n.value = std::move(value);
  n.aux = std::move(aux);
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

Tape::Id Tape::leaf(NumArray value) {
  if (!value.all_finite()) {
    throw NumericError("non-finite value passed to tape leaf");
  }
  return push(Op::Leaf, 0, 0, std::move(value));
}

Tape::Id Tape::constant(NumArray value) { return leaf(std::move(value)); }

Tape::Id Tape::add(Id a, Id b) {
  const NumArray& va = node(a).value;
  const NumArray& vb = node(b).value;
  check_same_shape(va, vb, "add");
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] + vb[i];
  return push(Op::Add, a, b, NumArray::unchecked(va.shape(), std::move(out)));
}

Tape::Id Tape::sub(Id a, Id b) {
  const NumArray& va = node(a).value;
  const NumArray& vb = node(b).value;
  check_same_shape(va, vb, "sub");
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] - vb[i];
  return push(Op::Sub, a, b, NumArray::unchecked(va.shape(), std::move(out)));
}

Tape::Id Tape::mul(Id a, Id b) {
  const NumArray& va = node(a).value;
  const NumArray& vb = node(b).value;
  check_same_shape(va, vb, "mul");
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] * vb[i];
  return push(Op::Mul, a, b, NumArray::unchecked(va.shape(), std::move(out)));
}

Tape::Id Tape::affine(Id a, double scale, double shift) {
  const NumArray& va = node(a).value;
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * va[i] + shift;
  return push(Op::Affine, a, 0,
              NumArray::unchecked(va.shape(), std::move(out)),
              AffineAux{scale, shift});
}

Tape::Id Tape::matmul(Id a, Id b) {
  const NumArray& va = node(a).value;
  const NumArray& vb = node(b).value;
  if (va.rank() != 2 || vb.rank() != 2 || va.cols() != vb.rows()) {
    throw ShapeError("matmul: need (n,k) x (k,m) operands");
  }
  const std::size_t n = va.rows(), k = va.cols(), m = vb.cols();
  std::vector<double> out(n * m, 0.0);
  // i-k-j order keeps the inner loop contiguous on both out and vb.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double aik = va[i * k + kk];
      const double* brow = vb.values().data() + kk * m;
      double* orow = out.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += aik * brow[j];
    }
  }
  return push(Op::MatMul, a, b, NumArray::unchecked({n, m}, std::move(out)));
}

Tape::Id Tape::add_row(Id m, Id row) {
  const NumArray& vm = node(m).value;
  const NumArray& vr = node(row).value;
  if (vm.rank() != 2 || vr.rank() != 1 || vm.cols() != vr.size()) {
    throw ShapeError("add_row: need (n,k) matrix and length-k row");
  }
  std::vector<double> out(vm.size());
  const std::size_t k = vm.cols();
  for (std::size_t i = 0; i < vm.rows(); ++i) {
    for (std::size_t j = 0; j < k; ++j) out[i * k + j] = vm[i * k + j] + vr[j];
  }
  return push(Op::AddRow, m, row,
              NumArray::unchecked(vm.shape(), std::move(out)));
}

Tape::Id Tape::slice(Id v, std::size_t offset, std::size_t len) {
  const NumArray& vv = node(v).value;
  if (vv.rank() != 1 || offset + len > vv.size()) {
    throw ShapeError("slice: range out of bounds or operand not rank-1");
  }
  std::vector<double> out(vv.values().begin() + offset,
                          vv.values().begin() + offset + len);
  return push(Op::Slice, v, 0, NumArray::unchecked({len}, std::move(out)),
              SliceAux{offset, len});
}

Tape::Id Tape::reshape(Id a, std::vector<std::size_t> shape) {
  const NumArray& va = node(a).value;
  if (shape_size(shape) != va.size()) {
    throw ShapeError("reshape: element count mismatch");
  }
  std::vector<double> out(va.values());
  return push(Op::Reshape, a, 0,
              NumArray::unchecked(std::move(shape), std::move(out)));
}

Tape::Id Tape::sigmoid(Id a) {
  const NumArray& va = node(a).value;
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = va[i];
    out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                      : std::exp(x) / (1.0 + std::exp(x));
  }
  return push(Op::Sigmoid, a, 0,
              NumArray::unchecked(va.shape(), std::move(out)));
}

Tape::Id Tape::relu(Id a) {
  const NumArray& va = node(a).value;
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = va[i] > 0.0 ? va[i] : 0.0;
  return push(Op::Relu, a, 0, NumArray::unchecked(va.shape(), std::move(out)));
}

Tape::Id Tape::softmax_rows(Id a) {
  const NumArray& va = node(a).value;
  if (va.rank() != 2) throw ShapeError("softmax_rows: operand not rank-2");
  const std::size_t n = va.rows(), k = va.cols();
  std::vector<double> out(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = va[i * k];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, va[i * k + j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double z = std::max(va[i * k + j] - mx, kSoftmaxExpFloor);
      out[i * k + j] = std::exp(z);
      sum += out[i * k + j];
    }
    for (std::size_t j = 0; j < k; ++j) out[i * k + j] /= sum;
  }
  return push(Op::SoftmaxRows, a, 0,
              NumArray::unchecked(va.shape(), std::move(out)));
}

Tape::Id Tape::nll_rows(Id probs, std::vector<int> labels, double floor,
                        double bound, bool clamp) {
  const NumArray& vp = node(probs).value;
  if (vp.rank() != 2) throw ShapeError("nll_rows: probs not rank-2");
  const std::size_t n = vp.rows(), k = vp.cols();
  if (labels.size() != n) throw ShapeError("nll_rows: label count mismatch");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw LabelError("nll_rows: label out of range at row " +
                       std::to_string(i));
    }
    double v = -std::log(std::max(vp[i * k + y], floor));
    if (clamp) v = std::min(std::max(v, 0.0), bound);
    out[i] = v;
  }
  return push(Op::NllRows, probs, 0, NumArray::unchecked({n}, std::move(out)),
              LossAux{std::move(labels), {}, floor, bound, clamp});
}

Tape::Id Tape::kl_rows(Id p, Id q, double floor, double bound, bool clamp) {
  const NumArray& vp = node(p).value;
  const NumArray& vq = node(q).value;
  check_same_shape(vp, vq, "kl_rows");
  if (vp.rank() != 2) throw ShapeError("kl_rows: operands not rank-2");
  const std::size_t n = vp.rows(), k = vp.cols();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double pv = vp[i * k + j];
      const double pf = std::max(pv, floor);
      const double qf = std::max(vq[i * k + j], floor);
      acc += pv * (std::log(pf) - std::log(qf));
    }
    if (clamp) acc = std::min(std::max(acc, 0.0), bound);
    out[i] = acc;
  }
  return push(Op::KlRows, p, q, NumArray::unchecked({n}, std::move(out)),
              LossAux{{}, {}, floor, bound, clamp});
}

Tape::Id Tape::sqerr_rows(Id pred, std::vector<double> targets, double bound,
                          bool clamp) {
  const NumArray& vp = node(pred).value;
  if (vp.rank() != 2 || vp.cols() != 1) {
    throw ShapeError("sqerr_rows: pred must be (n,1)");
  }
  const std::size_t n = vp.rows();
  if (targets.size() != n) throw ShapeError("sqerr_rows: target count mismatch");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = vp[i] - targets[i];
    double v = d * d;
    if (clamp) v = std::min(v, bound);
    out[i] = v;
  }
  return push(Op::SqErrRows, pred, 0, NumArray::unchecked({n}, std::move(out)),
              LossAux{{}, std::move(targets), 0.0, bound, clamp});
}

Tape::Id Tape::sum(Id v) {
  const NumArray& vv = node(v).value;
  double acc = 0.0;
  for (std::size_t i = 0; i < vv.size(); ++i) acc += vv[i];
  return push(Op::Sum, v, 0, NumArray::unchecked({}, {acc}));
}

Tape::Id Tape::mean(Id v) {
  const NumArray& vv = node(v).value;
  if (vv.size() == 0) throw ShapeError("mean: empty operand");
  double acc = 0.0;
  for (std::size_t i = 0; i < vv.size(); ++i) acc += vv[i];
  return push(Op::Mean, v, 0,
              NumArray::unchecked({}, {acc / static_cast<double>(vv.size())}));
}

Tape::Id Tape::weighted_sum(Id v, NumArray weights) {
  const NumArray& vv = node(v).value;
  if (vv.size() != weights.size()) {
    throw ShapeError("weighted_sum: weight count mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < vv.size(); ++i) acc += weights[i] * vv[i];
  return push(Op::WeightedSum, v, 0, NumArray::unchecked({}, {acc}),
              WeightAux{std::move(weights)});
}

const NumArray& Tape::value(Id id) const { return node(id).value; }

const NumArray& Tape::adjoint(Id id) const {
  if (!backward_done_) throw ShapeError("adjoint(): backward() not run");
  return node(id).adjoint;
}

void Tape::backward(Id output) {
  if (output >= nodes_.size()) throw ShapeError("backward: bad output id");
  if (nodes_[output].value.size() != 1) {
    throw ShapeError("backward: output node is not scalar");
  }
  for (Node& n : nodes_) {
    n.adjoint = NumArray::zeros(n.value.shape());
  }
  nodes_[output].adjoint[0] = 1.0;

  for (std::size_t idx = nodes_.size(); idx-- > 0;) {
    Node& n = nodes_[idx];
    const NumArray& g = n.adjoint;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::Add: {
        NumArray& ga = nodes_[n.a].adjoint;
        NumArray& gb = nodes_[n.b].adjoint;
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        break;
      }
      case Op::Sub: {
        NumArray& ga = nodes_[n.a].adjoint;
        NumArray& gb = nodes_[n.b].adjoint;
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i];
          gb[i] -= g[i];
        }
        break;
      }
      case Op::Mul: {
        const NumArray& va = nodes_[n.a].value;
        const NumArray& vb = nodes_[n.b].value;
        NumArray& ga = nodes_[n.a].adjoint;
        NumArray& gb = nodes_[n.b].adjoint;
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i] * vb[i];
          gb[i] += g[i] * va[i];
        }
        break;
      }
      case Op::Affine: {
        const auto& aux = std::get<AffineAux>(n.aux);
        NumArray& ga = nodes_[n.a].adjoint;
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += aux.scale * g[i];
        break;
      }
      case Op::MatMul: {
        const NumArray& va = nodes_[n.a].value;
        const NumArray& vb = nodes_[n.b].value;
        NumArray& ga = nodes_[n.a].adjoint;
        NumArray& gb = nodes_[n.b].adjoint;
        const std::size_t nn = va.rows(), k = va.cols(), m = vb.cols();
        // ga += g * vb^T
        for (std::size_t i = 0; i < nn; ++i) {
          for (std::size_t j = 0; j < m; ++j) {
            const double gij = g[i * m + j];
            if (gij == 0.0) continue;
            const double* brow = vb.values().data() + 0;
            for (std::size_t kk = 0; kk < k; ++kk) {
              ga[i * k + kk] += gij * brow[kk * m + j];
            }
          }
        }
        // gb += va^T * g
        for (std::size_t i = 0; i < nn; ++i) {
          for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = va[i * k + kk];
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) {
              gb[kk * m + j] += aik * g[i * m + j];
            }
          }
        }
        break;
      }
      case Op::AddRow: {
        NumArray& gm = nodes_[n.a].adjoint;
        NumArray& gr = nodes_[n.b].adjoint;
        const std::size_t k = n.value.cols();
        for (std::size_t i = 0; i < n.value.rows(); ++i) {
          for (std::size_t j = 0; j < k; ++j) {
            gm[i * k + j] += g[i * k + j];
            gr[j] += g[i * k + j];
          }
        }
        break;
      }
      case Op::Slice: {
        const auto& aux = std::get<SliceAux>(n.aux);
        NumArray& ga = nodes_[n.a].adjoint;
        for (std::size_t i = 0; i < aux.len; ++i) ga[aux.offset + i] += g[i];
        break;
      }
      case Op::Reshape: {
        NumArray& ga = nodes_[n.a].adjoint;
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        break;
      }
      case Op::Sigmoid: {
        NumArray& ga = nodes_[n.a].adjoint;
        const NumArray& s = n.value;
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i] * s[i] * (1.0 - s[i]);
        }
        break;
      }
      case Op::Relu: {
        NumArray& ga = nodes_[n.a].adjoint;
        const NumArray& va = nodes_[n.a].value;
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (va[i] > 0.0) ga[i] += g[i];
        }
        break;
      }
      case Op::SoftmaxRows: {
        NumArray& ga = nodes_[n.a].adjoint;
        const NumArray& p = n.value;
        const std::size_t k = p.cols();
        for (std::size_t i = 0; i < p.rows(); ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < k; ++j) dot += g[i * k + j] * p[i * k + j];
          for (std::size_t j = 0; j < k; ++j) {
            ga[i * k + j] += p[i * k + j] * (g[i * k + j] - dot);
          }
        }
        break;
      }
      case Op::NllRows: {
        const auto& aux = std::get<LossAux>(n.aux);
        NumArray& gp = nodes_[n.a].adjoint;
        const NumArray& p = nodes_[n.a].value;
        const std::size_t k = p.cols();
        for (std::size_t i = 0; i < p.rows(); ++i) {
          const int y = aux.labels[i];
          const double py = p[i * k + y];
          if (py <= aux.floor) continue;            // flat below the floor
          if (aux.clamp && (n.value[i] >= aux.bound || n.value[i] <= 0.0)) {
            continue;                               // clamped region
          }
          gp[i * k + y] += g[i] * (-1.0 / py);
        }
        break;
      }
      case Op::KlRows: {
        const auto& aux = std::get<LossAux>(n.aux);
        const NumArray& p = nodes_[n.a].value;
        const NumArray& q = nodes_[n.b].value;
        NumArray& gp = nodes_[n.a].adjoint;
        NumArray& gq = nodes_[n.b].adjoint;
        const std::size_t k = p.cols();
        for (std::size_t i = 0; i < p.rows(); ++i) {
          const double raw = n.value[i];
          if (aux.clamp && (raw <= 0.0 || raw >= aux.bound)) continue;
          for (std::size_t j = 0; j < k; ++j) {
            const double pv = p[i * k + j];
            const double qv = q[i * k + j];
            const double pf = std::max(pv, aux.floor);
            const double qf = std::max(qv, aux.floor);
            double dp = std::log(pf) - std::log(qf);
            if (pv > aux.floor) dp += 1.0;
            gp[i * k + j] += g[i] * dp;
            if (qv > aux.floor) gq[i * k + j] += g[i] * (-pv / qf);
          }
        }
        break;
      }
      case Op::SqErrRows: {
        const auto& aux = std::get<LossAux>(n.aux);
        NumArray& gp = nodes_[n.a].adjoint;
        const NumArray& p = nodes_[n.a].value;
        for (std::size_t i = 0; i < p.rows(); ++i) {
          if (aux.clamp && n.value[i] >= aux.bound) continue;
          gp[i] += g[i] * 2.0 * (p[i] - aux.targets[i]);
        }
        break;
      }
      case Op::Sum: {
        NumArray& ga = nodes_[n.a].adjoint;
        const double gs = g[0];
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gs;
        break;
      }
      case Op::Mean: {
        NumArray& ga = nodes_[n.a].adjoint;
        const double gs = g[0] / static_cast<double>(ga.size());
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gs;
        break;
      }
      case Op::WeightedSum: {
        const auto& aux = std::get<WeightAux>(n.aux);
        NumArray& ga = nodes_[n.a].adjoint;
        const double gs = g[0];
        for (std::size_t i = 0; i < ga.size(); ++i) {
          ga[i] += gs * aux.weights[i];
        }
        break;
      }
    }
    if (!n.adjoint.all_finite()) {
      throw NumericError(std::string("non-finite adjoint at op '") +
                         op_name(n.op) + "'");
    }
  }
  backward_done_ = true;
}

double eval_expr(const ScalarExpr& f, const NumArray& theta) {
  Tape tape;
  const Tape::Id t = tape.leaf(theta);
  const Tape::Id out = f(tape, t);
  return tape.value(out).scalar_value();
}

NumArray grad(const ScalarExpr& f, const NumArray& theta) {
  Tape tape;
  const Tape::Id t = tape.leaf(theta);
  const Tape::Id out = f(tape, t);
  if (tape.value(out).size() != 1) {
    throw ShapeError("grad: expression is not scalar-valued");
  }
  tape.backward(out);
  NumArray g = tape.adjoint(t);
  if (!g.all_finite()) throw NumericError("grad: non-finite gradient");
  return g;
}

NumArray finite_diff_grad(const std::function<double(const NumArray&)>& f,
                          const NumArray& theta, double step) {
  if (!(step > 0.0)) throw ConfigError("finite_diff_grad: step must be positive");
  std::vector<double> g(theta.size());
  std::vector<double> work(theta.values());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double orig = work[i];
    work[i] = orig + step;
    const double up = f(NumArray(theta.shape(), work));
    work[i] = orig - step;
    const double dn = f(NumArray(theta.shape(), work));
    work[i] = orig;
    g[i] = (up - dn) / (2.0 * step);
  }
  return NumArray(theta.shape(), std::move(g));
}

NumArray finite_diff_grad(const ScalarExpr& f, const NumArray& theta,
                          double step) {
  return finite_diff_grad(
      [&f](const NumArray& th) { return eval_expr(f, th); }, theta, step);
}

}  // namespace pacc
