#pragma once

#include <stdexcept>
#include <string>

namespace gbest {

// Base class for all library errors (bad input, schema violations, ...).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An iterative fit failed to converge (e.g. monotone-likelihood separation
// in the Cox model, or a degenerate Weibull scale). Callers that have a
// fallback catch this type specifically.
struct ConvergenceError : Error {
    using Error::Error;
};

}  // namespace gbest
