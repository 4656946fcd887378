// Copyright 2026 The spinquad Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace spinquad {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied parameters (bad rates, grid sizes, config values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failure of a numerical kernel; subclasses identify which one.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Rates outside their physical domain (negative rate, |eta| > 1).
class InvalidRates : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NotHermitian : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IllConditioned : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A multipole was requested for a density matrix with zero trace.
class ZeroTrace : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Population variations that do not sum to zero.
class UnnormalizedInput : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The generator has a null space of dimension other than one.
class DegenerateKernel : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The first-harmonic response system is numerically singular.
class SingularResponse : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The peak-area design matrix is rank deficient.
class SingularExtraction : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace spinquad
