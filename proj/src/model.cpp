#include "pacc/model.hpp"

#include <cmath>
#include <utility>

#include "pacc/errors.hpp"

namespace pacc {

void ModelSpec::validate() const {
  if (input_dim == 0) throw ConfigError("ModelSpec: input_dim must be positive");
  if (output_dim == 0) throw ConfigError("ModelSpec: output_dim must be positive");
  if (kind == ModelKind::Linear && !hidden.empty()) {
    throw ConfigError("ModelSpec: linear model cannot have hidden layers");
  }
  if (kind == ModelKind::Mlp && hidden.empty()) {
    throw ConfigError("ModelSpec: mlp needs at least one hidden layer");
  }
  for (std::size_t h : hidden) {
    if (h == 0) throw ConfigError("ModelSpec: hidden width must be positive");
  }
  if (output_map == OutputMap::Softmax && output_dim < 2) {
    throw ConfigError("ModelSpec: softmax output needs at least 2 classes");
  }
}

std::vector<std::size_t> ModelSpec::layer_dims() const {
  std::vector<std::size_t> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output_dim);
  return dims;
}

std::size_t ModelSpec::param_count() const {
  const auto dims = layer_dims();
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    n += dims[l] * dims[l + 1] + dims[l + 1];
  }
  return n;
}

std::vector<LayerSlice> parameter_layout(const ModelSpec& spec) {
  const auto dims = spec.layer_dims();
  std::vector<LayerSlice> layout;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    LayerSlice s;
    s.in_dim = dims[l];
    s.out_dim = dims[l + 1];
    s.w_offset = offset;
    offset += s.in_dim * s.out_dim;
    s.b_offset = offset;
    offset += s.out_dim;
    layout.push_back(s);
  }
  return layout;
}

ParameterVector::ParameterVector(const ModelSpec& spec, NumArray theta_in) {
  spec.validate();
  if (theta_in.rank() != 1 || theta_in.size() != spec.param_count()) {
    throw ShapeError("ParameterVector: expected flat vector of length " +
                     std::to_string(spec.param_count()));
  }
  theta = std::move(theta_in);
}

ParameterVector init_params(const ModelSpec& spec, ThetaInit init, Rng& rng) {
  spec.validate();
  std::vector<double> theta(spec.param_count(), 0.0);
  if (init == ThetaInit::ScaledUniform) {
    for (const LayerSlice& s : parameter_layout(spec)) {
      const double scale = 1.0 / std::sqrt(static_cast<double>(s.in_dim));
      for (std::size_t i = 0; i < s.in_dim * s.out_dim; ++i) {
        theta[s.w_offset + i] = rng.uniform(-scale, scale);
      }
      // biases stay zero
    }
  }
  return ParameterVector(spec, NumArray::from_vector(std::move(theta)));
}

Tape::Id model_graph(Tape& tape, const ModelSpec& spec, Tape::Id theta,
                     Tape::Id features) {
  spec.validate();
  const NumArray& x = tape.value(features);
  if (x.rank() != 2 || x.cols() != spec.input_dim) {
    throw ShapeError("model_graph: features must be (n, " +
                     std::to_string(spec.input_dim) + ")");
  }
  if (tape.value(theta).size() != spec.param_count()) {
    throw ShapeError("model_graph: theta length mismatch");
  }
  Tape::Id h = features;
  const auto layout = parameter_layout(spec);
  for (std::size_t l = 0; l < layout.size(); ++l) {
    const LayerSlice& s = layout[l];
    const Tape::Id w = tape.reshape(
        tape.slice(theta, s.w_offset, s.in_dim * s.out_dim),
        {s.in_dim, s.out_dim});
    const Tape::Id b = tape.slice(theta, s.b_offset, s.out_dim);
    h = tape.add_row(tape.matmul(h, w), b);
    const bool last = (l + 1 == layout.size());
    if (!last) {
      h = spec.activation == Activation::Sigmoid ? tape.sigmoid(h)
                                                 : tape.relu(h);
    }
  }
  if (spec.output_map == OutputMap::Softmax) h = tape.softmax_rows(h);
  return h;
}

NumArray forward_batch(const ModelSpec& spec, const ParameterVector& params,
                       const NumArray& features) {
  Tape tape;
  const Tape::Id t = tape.leaf(params.theta);
  const Tape::Id x = tape.constant(features);
  return tape.value(model_graph(tape, spec, t, x));
}

NumArray forward(const ModelSpec& spec, const ParameterVector& params,
                 const NumArray& x) {
  if (x.rank() != 1) throw ShapeError("forward: x must be rank-1");
  const NumArray batch =
      forward_batch(spec, params, NumArray({1, x.size()}, x.values()));
  std::vector<double> row(batch.values().begin(), batch.values().end());
  return NumArray::from_vector(std::move(row));
}

std::vector<int> predict_classes(const ModelSpec& spec,
                                 const ParameterVector& params,
                                 const NumArray& features) {
  const NumArray out = forward_batch(spec, params, features);
  const std::size_t n = out.rows(), k = out.cols();
  std::vector<int> classes(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (out[i * k + j] > out[i * k + best]) best = j;
    }
    classes[i] = static_cast<int>(best);
  }
  return classes;
}

}  // namespace pacc
