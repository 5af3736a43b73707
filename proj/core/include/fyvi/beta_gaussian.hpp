#ifndef FYVI_BETA_GAUSSIAN_HPP
#define FYVI_BETA_GAUSSIAN_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fyvi/deformed_math.hpp"
#include "fyvi/rng.hpp"

namespace fyvi {

/// Diagonal (2-rho)-Gaussian: independent location-scale coordinates
/// z_d = mu_d + sigma_d * u_d with u_d drawn from the standard member.
///
/// The standard member is the Tsallis-rho prediction map of the score
/// eta(u) = -u^2 / 2, g(u) = exp_{2-rho}(-u^2/2 - A_rho). rho = 1 is the
/// normal, rho = 3/2 the biweight, rho = 2 the Epanechnikov kernel.
class BetaGaussianParams {
 public:
  /// Throws DomainError unless sizes match, every sigma_d > 0, and
  /// rho is 1 or lies in (1, 2].
  BetaGaussianParams(std::vector<double> mu, std::vector<double> sigma, EntropicIndex rho);

  std::size_t dim() const noexcept { return mu_.size(); }
  const std::vector<double>& mu() const noexcept { return mu_; }
  const std::vector<double>& sigma() const noexcept { return sigma_; }
  EntropicIndex rho() const noexcept { return rho_; }

 private:
  std::vector<double> mu_;
  std::vector<double> sigma_;
  EntropicIndex rho_;
};

/// Marker for the standard-normal scoring function eta(z) = -||z||^2 / 2.
struct StandardNormalScore {};

/// Constants of the standard (mu = 0, sigma = 1) member for one rho.
///
/// For rho > 1, g(u) = [a - (rho-1) u^2 / 2]_+^(1/(rho-1)) with
/// a = 1 - (rho-1) A_rho, supported on |u| <= radius.
struct StandardMember {
  double rho = 1.0;
  double log_normalizer = 0.0;   ///< A_rho
  double bracket = 1.0;          ///< a (1 at rho = 1, unused there)
  double radius = 0.0;           ///< +inf at rho = 1
  double variance = 1.0;         ///< E[u^2], by quadrature
  double power_integral = 0.0;   ///< int g^rho, by quadrature (unused at rho = 1)
  double negentropy = 0.0;       ///< Omega_rho(g)
  double conjugate = 0.0;        ///< Omega*_rho(eta) = E_g[eta] - Omega_rho(g)
  std::vector<double> knots;     ///< CDF table abscissae
  std::vector<double> cdf;       ///< CDF at knots
};

inline constexpr std::size_t kCdfKnots = 4096;
inline constexpr std::size_t kQuadratureNodes = 512;
inline constexpr double kQuantileTolerance = 1e-10;

/// Cached per rho; built once, read-only afterwards, safe to share.
const StandardMember& standard_member(EntropicIndex rho);

double standard_pdf(double u, const StandardMember& member);
double standard_cdf(double u, const StandardMember& member);
/// Inverse CDF; p in (0, 1). Accurate to kQuantileTolerance in p.
double standard_quantile(double p, const StandardMember& member);

/// Product density of the diagonal family.
double pdf(const BetaGaussianParams& params, std::span<const double> z);

/// Half-width of the support in dimension `dim`; +inf at rho = 1.
double support_radius(const BetaGaussianParams& params, std::size_t dim);

/// n x D matrix of i.i.d. draws, mu + sigma * eps with eps from the standard
/// member by inverse CDF.
Eigen::MatrixXd sample(const BetaGaussianParams& params, std::size_t n, std::uint64_t seed);
/// Draws from the standard member using a caller-owned generator.
double sample_standard(const StandardMember& member, Rng& rng);

/// FY loss L_{Omega_rho}(eta_N(0,I); q) summed over dimensions. Zero at
/// mu = 0, sigma = 1, and equal to KL(q || N(0, I)) at rho = 1. Throws
/// DomainError if rho_reg differs from params.rho().
double fy_regularizer(const BetaGaussianParams& params, StandardNormalScore prior, EntropicIndex rho_reg);

struct RegularizerGradient {
  std::vector<double> d_mu;
  std::vector<double> d_sigma;
};
RegularizerGradient fy_regularizer_gradient(const BetaGaussianParams& params, StandardNormalScore prior,
                                            EntropicIndex rho_reg);

/// One coordinate of the regularizer and its partial derivatives.
struct ScalarRegularizer {
  double value;
  double d_mu;
  double d_sigma;
};
ScalarRegularizer fy_regularizer_1d(double mu, double sigma, const StandardMember& member);

}  // namespace fyvi

#endif  // FYVI_BETA_GAUSSIAN_HPP
