#pragma once

#include <stdexcept>

namespace bmn {

// Raised when a combinatorial safety guard trips, as opposed to a plain
// usage error; the CLI maps this to its own exit code.
class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bmn
