#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ecmc {

// Collected non-fatal diagnostics. Functions that can warn accept a nullable
// pointer; a null sink silently drops the messages.
using WarningList = std::vector<std::string>;

inline void warn(WarningList* sink, std::string message) {
    if (sink != nullptr) {
        sink->push_back(std::move(message));
    }
}

// Malformed external input (bad CSV shape, unparseable number, bad header).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally valid input that carries no usable data.
struct EmptyInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid run configuration (out-of-range parameter, inconsistent flags).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A documented precondition was violated by the caller.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// A numeric routine produced non-finite values or failed to converge where
// convergence is required.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ecmc
