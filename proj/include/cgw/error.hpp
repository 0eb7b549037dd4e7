#pragma once

#include <stdexcept>
#include <string>

namespace cgw {

// Bad user input (config keys, grid sizes, kernel modes).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluation outside the domain of a function (poles, branch issues, Re λ ≤ −δ).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A paper-level property failed to hold numerically (e.g. Re P2 ≤ 0, dissipativity).
struct PropertyViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Linear algebra breakdown: failed factorization, singular shift.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cgw
