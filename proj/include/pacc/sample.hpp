#pragma once

#include <string>
#include <vector>

#include "pacc/array.hpp"

namespace pacc {

// A batch of rows with integer class labels and a provenance tag.
struct SampleSet {
  NumArray features;        // (n, d)
  std::vector<int> labels;  // length n
  std::string source_id;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.rank() == 2 ? features.cols() : 0; }

  // Checks the row/label count match; when num_classes > 0 also checks the
  // label range.
  void validate(std::size_t num_classes = 0) const;

  SampleSet rows(const std::vector<std::size_t>& indices) const;
};

}  // namespace pacc
