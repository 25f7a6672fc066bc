#pragma once

#include <stdexcept>
#include <string>

namespace bdagar {

// Bad user input: malformed files, domain violations, mismatched ids.
// The CLI maps this to exit code 1; anything else lands on exit code 2.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bdagar
