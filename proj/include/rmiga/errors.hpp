#pragma once

#include <stdexcept>
#include <string>

namespace rmiga {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or an inadmissible space/formulation combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested outside the parametric domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An operation was called on an object that does not satisfy its precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Factorization or linear solve failure.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// The Gramm matrix is not positive definite for the chosen parameters.
class GrammError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace rmiga
