#pragma once

#include <stdexcept>

namespace elab {

// Exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exit code 3.
struct PhysicsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exit code 4.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace elab
