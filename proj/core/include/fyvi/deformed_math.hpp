#ifndef FYVI_DEFORMED_MATH_HPP
#define FYVI_DEFORMED_MATH_HPP

namespace fyvi {

/// Entropic index of a Tsallis entropy / deformed log-exp pair.
///
/// Values within `kUnitTolerance` of one select the classical log/exp branch;
/// the deformed formulas cancel catastrophically there.
class EntropicIndex {
 public:
  static constexpr double kUnitTolerance = 1e-8;

  /// Throws DomainError unless rho > 0 and finite.
  explicit EntropicIndex(double rho);

  double value() const noexcept { return rho_; }
  bool is_unit() const noexcept;
  /// The dual index 2 - rho (only meaningful while it stays positive).
  EntropicIndex dual() const { return EntropicIndex(2.0 - rho_); }

  friend bool operator==(EntropicIndex a, EntropicIndex b) noexcept { return a.rho_ == b.rho_; }

 private:
  double rho_;
};

/// rho-deformed logarithm (x^(1-rho) - 1) / (1 - rho); ln(x) at rho = 1.
/// Throws DomainError for x <= 0.
double log_rho(double x, EntropicIndex rho);

/// rho-deformed exponential [1 + (1-rho) x]_+^(1/(1-rho)); e^x at rho = 1.
/// Returns 0 where the bracket is non-positive and the exponent is positive,
/// +infinity where the bracket vanishes under a negative exponent.
double exp_rho(double x, EntropicIndex rho);

}  // namespace fyvi

#endif  // FYVI_DEFORMED_MATH_HPP
