#ifndef DIPOLEKIT_ERRORS_HPP
#define DIPOLEKIT_ERRORS_HPP

#include <array>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dipolekit {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: non-unit direction, wrong dipole kind, bad node counts.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Input outside the domain of a formula (r = 0, Omega <= 0, cutoff <= 0).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A truncated series or extrapolation did not reach the requested tolerance.
/// `history` holds the partial values the decision was based on.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

private:
  std::vector<double> history_;
};

/// Some lattice image sits (numerically) on top of the partner dipole.
class ImageCoincidenceError : public DomainError {
public:
  using DomainError::DomainError;
};

/// A cavity mode is within `delta_min` of the transition frequency.
class ResonanceError : public DomainError {
public:
  ResonanceError(const std::string& what, std::array<int, 3> n, double omega_k, double detuning)
      : DomainError(what), n_(n), omega_k_(omega_k), detuning_(detuning) {}

  std::array<int, 3> mode() const noexcept { return n_; }
  double omega_k() const noexcept { return omega_k_; }
  double detuning() const noexcept { return detuning_; }

private:
  std::array<int, 3> n_;
  double omega_k_;
  double detuning_;
};

} // namespace dipolekit

#endif // DIPOLEKIT_ERRORS_HPP
