#pragma once

#include <stdexcept>
#include <string>

namespace compatkit {

// Malformed input: bad cycle syntax, inconsistent degrees, invalid expression.
struct InputError : std::runtime_error {
  explicit InputError(std::string const &what) : std::runtime_error(what) {}
};

// A configured bound was exceeded (coset table size, backtracking nodes, ...).
struct ResourceError : std::runtime_error {
  explicit ResourceError(std::string const &what) : std::runtime_error(what) {}
};

// A decision procedure ran out of applicable methods; distinct from "false".
struct UndecidedError : std::runtime_error {
  explicit UndecidedError(std::string const &what) : std::runtime_error(what) {}
};

} // namespace compatkit
