#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pacc/array.hpp"
#include "pacc/rng.hpp"
#include "pacc/tape.hpp"

namespace pacc {

enum class ModelKind { Linear, Mlp };
enum class OutputMap { Softmax, Identity };
enum class Activation { Sigmoid, Relu };

struct ModelSpec {
  ModelKind kind = ModelKind::Linear;
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;   // empty for Linear
  std::size_t output_dim = 2;
  OutputMap output_map = OutputMap::Softmax;
  Activation activation = Activation::Sigmoid;

  void validate() const;
  std::size_t param_count() const;
  std::vector<std::size_t> layer_dims() const;  // [input, hidden..., output]
};

// Slice of the flat parameter vector belonging to one dense layer: a
// (in_dim x out_dim) weight block followed by an out_dim bias block.
struct LayerSlice {
  std::size_t w_offset = 0;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::size_t b_offset = 0;
};

std::vector<LayerSlice> parameter_layout(const ModelSpec& spec);

// Flat parameters; length checked against the spec at construction.
struct ParameterVector {
  ParameterVector() = default;
  ParameterVector(const ModelSpec& spec, NumArray theta);
  NumArray theta;
};

enum class ThetaInit { Zeros, ScaledUniform };

// ScaledUniform draws weights from U(-1/sqrt(fan_in), 1/sqrt(fan_in)) per
// layer and zeroes the biases; Zeros is the all-zero start.
ParameterVector init_params(const ModelSpec& spec, ThetaInit init, Rng& rng);

// Batched forward pass as a tape subgraph: features (n,d) -> outputs (n,k).
Tape::Id model_graph(Tape& tape, const ModelSpec& spec, Tape::Id theta,
                     Tape::Id features);

// Convenience wrappers that run the same graph on a private tape.
NumArray forward_batch(const ModelSpec& spec, const ParameterVector& params,
                       const NumArray& features);
NumArray forward(const ModelSpec& spec, const ParameterVector& params,
                 const NumArray& x);  // single sample, rank-1 in and out

std::vector<int> predict_classes(const ModelSpec& spec,
                                 const ParameterVector& params,
                                 const NumArray& features);

}  // namespace pacc
