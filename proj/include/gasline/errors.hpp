#pragma once

#include <stdexcept>
#include <string>

namespace gasline {

/// Input outside the mathematical domain of an operation (sonic states,
/// nonpositive density, branch violations).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent user input (configs, parameters).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The closed-form stationary profile would reach the sonic line before x = L.
class ProfileError : public DomainError {
 public:
  ProfileError(const std::string& what, double max_length)
      : DomainError(what), max_length_(max_length) {}

  /// Largest pipe length for which the profile stays subsonic.
  double max_length() const { return max_length_; }

 private:
  double max_length_;
};

/// A runtime monitor of the closed-loop simulation tripped.
class MonitorViolation : public std::runtime_error {
 public:
  MonitorViolation(std::string invariant, double t, double x, const std::string& detail)
      : std::runtime_error(invariant + " violated at t=" + std::to_string(t) +
                           ", x=" + std::to_string(x) + ": " + detail),
        invariant_(std::move(invariant)),
        t_(t),
        x_(x) {}

  const std::string& invariant() const { return invariant_; }
  double t() const { return t_; }
  double x() const { return x_; }

 private:
  std::string invariant_;
  double t_;
  double x_;
};

}  // namespace gasline
