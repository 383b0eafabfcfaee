#pragma once

#include <stdexcept>
#include <string>

namespace cpce {

// Input point outside the box of an InputSpec (beyond the clamping tolerance).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Base for every failure raised while fitting a least-squares PCE.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnderdeterminedError : public FitError {
 public:
  using FitError::FitError;
};

class RankDeficientError : public FitError {
 public:
  using FitError::FitError;
};

class LeverageError : public FitError {
 public:
  using FitError::FitError;
};

class ZeroVarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cpce
