#ifndef FYVI_ERRORS_HPP
#define FYVI_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fyvi {

/// Argument outside the mathematical domain of a function (e.g. log of a
/// non-positive number).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative or quadrature routine failed to reach its tolerance.
class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A covariance matrix could not be factorized.
class CovarianceError : public std::runtime_error {
 public:
  CovarianceError(const std::string& what, std::size_t component)
      : std::runtime_error(what + " (component " + std::to_string(component) + ")"),
        component_(component) {}

  std::size_t component() const noexcept { return component_; }

 private:
  std::size_t component_;
};

/// Malformed binary or text input.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace fyvi

#endif  // FYVI_ERRORS_HPP
