#pragma once

#include <stdexcept>
#include <string>

namespace seisfeat {

/// Base class for every error raised by the library. Messages start with a
/// short stable phrase ("missing file", "zero energy", ...) that callers and
/// tests can match on.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace seisfeat
