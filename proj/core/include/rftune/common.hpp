#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rftune {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class InvalidRank : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class NonpositiveParameter : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class InvalidPartition : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class DimensionUnsupported : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class CapExceeded : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class DegenerateData : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Numerical failures: these signal that a computation could not complete.
class NumericalError : public Error {
public:
    using Error::Error;
};

class FactorizationFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ForwardMapFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ZeroVarianceOutput : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BlowUp : public NumericalError {
public:
    BlowUp(const std::string& what, std::size_t step) : NumericalError(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class IoFailure : public Error {
public:
    using Error::Error;
};

}  // namespace rftune
