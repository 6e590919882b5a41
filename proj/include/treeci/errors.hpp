#pragma once

#include <stdexcept>
#include <string>

namespace treeci {

// Invalid model, pair, or argument: the inputs are structurally readable but
// violate a domain invariant (weight out of range, not a tree, bad graft, ...).
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed text input; message carries a line number where one applies.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace treeci
