#pragma once

#include <stdexcept>

namespace repalign {

// Input data is malformed or unusable. The CLI maps this to exit code 3,
// while std::invalid_argument (bad options/arguments) maps to exit code 2.
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structurally valid data that is degenerate for the requested statistic,
// e.g. a constant embedding whose centered kernel vanishes.
class degenerate_input_error : public data_error {
 public:
  using data_error::data_error;
};

}  // namespace repalign
