#pragma once

#include <stdexcept>
#include <string>

namespace efx {

// Bad user input (malformed files, out-of-range arguments). CLI exit code 2.
struct input_error : std::runtime_error {
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// A caller violated a documented precondition. Indicates a bug upstream.
// CLI exit code 3.
struct contract_error : std::logic_error {
  explicit contract_error(const std::string& what) : std::logic_error(what) {}
};

// A runtime invariant the algorithms guarantee did not hold (budget blown,
// potential failed to increase, configuration repeated). CLI exit code 3.
struct diagnostic_error : std::runtime_error {
  explicit diagnostic_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace efx
