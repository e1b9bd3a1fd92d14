#pragma once

#include <stdexcept>
#include <string>

namespace mlnk {

// Base class for every failure this library reports on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user input: malformed config, missing field, out-of-range parameter.
struct ValidationError : Error {
    using Error::Error;
};

// A mathematical precondition is violated (negative data, t <= 0, ...).
struct DomainError : Error {
    using Error::Error;
};

// Table lookup outside the sampled range.
struct RangeError : Error {
    using Error::Error;
};

// Operation not defined for the requested family.
struct UnsupportedFamilyError : Error {
    using Error::Error;
};

// Grid cannot represent the requested scales. Message carries a suggested
// remedy (larger n or larger L).
struct ResolutionError : Error {
    using Error::Error;
};

// Requested time window extends past what the periodic box can certify.
struct CoverageError : Error {
    using Error::Error;
};

// The quantity the caller asked for only exists when a convergence
// condition holds, and it does not.
struct CriterionInapplicableError : Error {
    using Error::Error;
};

// A construction hypothesis fails (e.g. the contraction constant diverges).
struct HypothesisError : Error {
    using Error::Error;
};

// Time stepper hit dt_min without any certified outcome.
struct StalledError : Error {
    using Error::Error;
};

// Request exceeds the configured memory budget.
struct CapacityError : Error {
    using Error::Error;
};

// Not enough samples to fit a model.
struct FitError : Error {
    using Error::Error;
};

// Two internally computed answers disagree where they must not.
struct InconsistencyError : Error {
    using Error::Error;
};

} // namespace mlnk
