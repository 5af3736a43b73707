#include "fyvi/deformed_math.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fyvi/errors.hpp"

namespace fyvi {

EntropicIndex::EntropicIndex(double rho) : rho_(rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw DomainError("entropic index must be a positive finite number, got " + std::to_string(rho));
  }
}

bool EntropicIndex::is_unit() const noexcept { return std::abs(rho_ - 1.0) < kUnitTolerance; }

double log_rho(double x, EntropicIndex rho) {
  if (!(x > 0.0)) {
    throw DomainError("log_rho requires x > 0, got " + std::to_string(x));
  }
  if (rho.is_unit()) return std::log(x);
  const double k = 1.0 - rho.value();
  // expm1 keeps precision for rho close to (but outside) the unit branch.
  return std::expm1(k * std::log(x)) / k;
}

double exp_rho(double x, EntropicIndex rho) {
  if (rho.is_unit()) return std::exp(x);
  const double k = 1.0 - rho.value();
  const double kx = k * x;
  const double bracket = 1.0 + kx;
  const double exponent = 1.0 / k;
  if (bracket <= 0.0) {
    return exponent > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return std::exp(exponent * std::log1p(kx));
}

}  // namespace fyvi
