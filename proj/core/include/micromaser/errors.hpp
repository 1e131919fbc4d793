#pragma once

#include <stdexcept>

namespace micromaser {

// Base class for numerical failures raised by the library.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParams : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Probability mass pushed past the photon-number truncation boundary.
struct TruncationOverflow : NumericalError {
    using NumericalError::NumericalError;
};

// The stationary-state tail criterion cannot be met below the configured cap.
struct NonConvergentTruncation : NumericalError {
    using NumericalError::NumericalError;
};

// The adaptive step controller ran out of step size.
struct StepSizeUnderflow : NumericalError {
    using NumericalError::NumericalError;
};

// An improper time integral failed to converge within the horizon cap.
struct NonDecayingTail : NumericalError {
    using NumericalError::NumericalError;
};

// Independent evaluation routes disagree beyond the cross-check tolerance.
struct CrossCheckMismatch : NumericalError {
    using NumericalError::NumericalError;
};

// A requested statistic is undefined for the channel (zero rate, no switches).
struct DegenerateChannel : NumericalError {
    using NumericalError::NumericalError;
};

// Too few events in a record to form the requested estimate.
struct InsufficientData : NumericalError {
    using NumericalError::NumericalError;
};

// A factorization hit an exactly singular operator.
struct SingularOperator : NumericalError {
    using NumericalError::NumericalError;
};

} // namespace micromaser
