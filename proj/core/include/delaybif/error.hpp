#pragma once

#include <stdexcept>
#include <string>

namespace delaybif {

/// Base for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs outside the documented domain (non-finite values, wrong signs, ...).
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// A caller broke a precondition that is not a plain parameter range, e.g.
/// querying a trajectory outside its stored domain.
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// An iterative method failed: Newton divergence, step-size underflow,
/// singular Jacobians, inaccurate Floquet spectra.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// A formula hit one of its degenerate configurations (beta = 0, h'' = 0, ...).
class Degeneracy : public Error {
public:
    using Error::Error;
};

}  // namespace delaybif
