#pragma once

#include <stdexcept>

namespace frn {

// Exception taxonomy mirrored by the CLI exit codes.
struct ConfigError : std::runtime_error {   // exit 2
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {       // exit 3
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {  // exit 4
  using std::runtime_error::runtime_error;
};
struct CompatError : std::runtime_error {   // exit 5
  using std::runtime_error::runtime_error;
};

}  // namespace frn
