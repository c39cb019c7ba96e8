#include "pacc/sample.hpp"

#include <string>

#include "pacc/errors.hpp"

namespace pacc {

void SampleSet::validate(std::size_t num_classes) const {
  if (features.rank() != 2) {
    throw ShapeError("SampleSet: features must be rank-2");
  }
  if (features.rows() != labels.size()) {
    throw ShapeError("SampleSet: " + std::to_string(features.rows()) +
                     " feature rows vs " + std::to_string(labels.size()) +
                     " labels");
  }
  if (num_classes > 0) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
        throw LabelError("SampleSet: label out of range at row " +
                         std::to_string(i));
      }
    }
  }
}

SampleSet SampleSet::rows(const std::vector<std::size_t>& indices) const {
  validate();
  const std::size_t d = features.cols();
  std::vector<double> data;
  data.reserve(indices.size() * d);
  std::vector<int> labs;
  labs.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= size()) throw ShapeError("SampleSet::rows: index out of range");
    const double* row = features.values().data() + idx * d;
    data.insert(data.end(), row, row + d);
    labs.push_back(labels[idx]);
  }
  SampleSet out;
  out.features = NumArray({indices.size(), d}, std::move(data));
  out.labels = std::move(labs);
  out.source_id = source_id;
  return out;
}

}  // namespace pacc
