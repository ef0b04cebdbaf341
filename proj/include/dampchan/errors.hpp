#pragma once

#include <stdexcept>
#include <string>

namespace dampchan {

// Matrix or state dimensions do not fit the operation.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A parameter lies outside its admissible domain (angles, fluxes, counts).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A matrix fails Hermiticity / positivity / normalization checks.
class InvalidStateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The ancilla-assisted input state is not faithful (Schmidt rank deficient).
class NonFaithfulInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A reconstruction could not be carried out (e.g. no counts at all).
class ReconstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dampchan
