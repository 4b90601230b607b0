#pragma once

#include <stdexcept>
#include <string>

namespace uygraph {

// Malformed or inconsistent input: bad CSV rows, mask violations, shape
// mismatches. CLI maps this to exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: eigensolver non-convergence, divergent training loss.
// CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Bad invocation: unknown model kind, unknown config key. CLI exit code 1.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace uygraph
