#pragma once

#include <stdexcept>
#include <string>

namespace sliceforge {

// Error taxonomy shared with the CLI exit-code contract:
//   ConfigError -> exit 2 (bad input, malformed files, unknown options)
//   DataError   -> exit 3 (semantically unusable data: empty sets, missing classes)
//   CompatError -> exit 4 (shape / checkpoint / dimension mismatches)
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CompatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sliceforge
