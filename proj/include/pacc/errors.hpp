#pragma once

#include <stdexcept>
#include <string>

namespace pacc {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };      // mismatched dimensions
struct NumericError : Error { using Error::Error; };    // NaN/Inf or overflow
struct LabelError : Error { using Error::Error; };      // class index out of range
struct ConfigError : Error { using Error::Error; };     // bad parameter or config field
struct DataError : Error { using Error::Error; };       // malformed input data
struct SchemaError : Error { using Error::Error; };     // dataset schema violations
struct InfeasibleError : Error { using Error::Error; }; // divergence guard / no feasible hypothesis

}  // namespace pacc
