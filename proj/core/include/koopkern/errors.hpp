#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace koopkern {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a precondition (dimension mismatch, non-positive
/// hyperparameter, empty input where one is required, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A kernel was evaluated outside its domain (e.g. singular_1d at |x| >= 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Linearization has complex or repeated eigenvalues.
class UnsupportedSpectrum : public Error {
 public:
  using Error::Error;
};

/// Requested eigenvalue is not in the linearization spectrum.
class UnknownEigenvalue : public Error {
 public:
  using Error::Error;
};

/// A trajectory left the escape radius (or became non-finite).
class BlowUp : public Error {
 public:
  BlowUp(const std::string& what, double escape_time)
      : Error(what), escape_time_(escape_time) {}

  /// Signed integration time at which the state left the escape radius.
  [[nodiscard]] double escape_time() const noexcept { return escape_time_; }

 private:
  double escape_time_;
};

/// The solution collapsed onto the trivial minimizer (or an input was
/// rank deficient where full rank is required).
class Degenerate : public Error {
 public:
  using Error::Error;
};

/// Normal equations could not be factorized even after maximal jitter.
class IllConditioned : public Error {
 public:
  IllConditioned(const std::string& what, double condition_estimate)
      : Error(what), condition_estimate_(condition_estimate) {}

  [[nodiscard]] double condition_estimate() const noexcept {
    return condition_estimate_;
  }

 private:
  double condition_estimate_;
};

/// Optimizer produced a non-finite loss.
class Divergence : public Error {
 public:
  Divergence(const std::string& what, std::vector<double> last_finite = {})
      : Error(what), last_finite_(std::move(last_finite)) {}

  /// Last iterate whose loss was finite (empty if there was none).
  [[nodiscard]] const std::vector<double>& last_finite() const noexcept {
    return last_finite_;
  }

 private:
  std::vector<double> last_finite_;
};

/// A numerical check could not reach a verdict (e.g. every probe excluded).
class Inconclusive : public Error {
 public:
  using Error::Error;
};

}  // namespace koopkern
