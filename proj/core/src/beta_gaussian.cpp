#include "fyvi/beta_gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "fyvi/errors.hpp"
#include "fyvi/quadrature.hpp"

namespace fyvi {

namespace {

// Beyond this many standard units the densities are below 1e-300 (rho = 1)
// or identically zero, so tables and integrals stop there.
constexpr double kTableHalfWidth = 40.0;
constexpr double kGaussianTableHalfWidth = 12.0;
constexpr std::size_t kSegmentNodes = 16;

void require_supported(EntropicIndex rho) {
  if (!rho.is_unit() && !(rho.value() > 1.0 && rho.value() <= 2.0)) {
    throw DomainError("(2-rho)-Gaussian supports rho = 1 or rho in (1, 2], got " + std::to_string(rho.value()));
  }
}

double normal_pdf(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }

double table_half_width(const StandardMember& m) {
  return std::isinf(m.radius) ? kGaussianTableHalfWidth : std::min(m.radius, kTableHalfWidth);
}

std::unique_ptr<StandardMember> build_member(EntropicIndex rho) {
  auto m = std::make_unique<StandardMember>();
  m->rho = rho.value();
  const double log_2pi = std::log(2.0 * std::numbers::pi);

  if (rho.is_unit()) {
    m->rho = 1.0;
    m->log_normalizer = 0.5 * log_2pi;
    m->radius = std::numeric_limits<double>::infinity();
    m->variance = 1.0;
    m->negentropy = -0.5 * (log_2pi + 1.0);
    m->conjugate = -0.5 * m->variance - m->negentropy;
  } else {
    const double r = rho.value();
    const double c = r - 1.0;
    const double p = 1.0 / c;
    // Unit mass fixes the bracket a: a^(p + 1/2) sqrt(2 / c) B(1/2, p + 1) = 1,
    // B(1/2, p + 1) being the integral of (1 - t^2)^p over [-1, 1].
    const double log_beta = std::lgamma(0.5) + std::lgamma(p + 1.0) - std::lgamma(p + 1.5);
    const double log_a = (0.5 * std::log(0.5 * c) - log_beta) / (p + 0.5);
    m->bracket = std::exp(log_a);
    m->log_normalizer = -std::expm1(log_a) / c;
    m->radius = std::sqrt(2.0 * m->bracket / c);

    const double half = table_half_width(*m);
    const GaussLegendre& gl = gauss_legendre(kQuadratureNodes);
    const StandardMember& ref = *m;
    m->variance = gl.integrate([&](double u) { return u * u * standard_pdf(u, ref); }, -half, half);
    m->power_integral = gl.integrate([&](double u) { return std::pow(standard_pdf(u, ref), r); }, -half, half);
    m->negentropy = (m->power_integral - 1.0) / (r * c);
    m->conjugate = -0.5 * m->variance - m->negentropy;
  }

  const double half = table_half_width(*m);
  m->knots.resize(kCdfKnots);
  m->cdf.resize(kCdfKnots);
  const double step = 2.0 * half / static_cast<double>(kCdfKnots - 1);
  const GaussLegendre& seg = gauss_legendre(kSegmentNodes);
  double acc = 0.0;
  for (std::size_t i = 0; i < kCdfKnots; ++i) {
    m->knots[i] = -half + step * static_cast<double>(i);
    if (rho.is_unit()) {
      m->cdf[i] = normal_cdf(m->knots[i]);
    } else {
      if (i > 0) acc += seg.integrate([&](double u) { return standard_pdf(u, *m); }, m->knots[i - 1], m->knots[i]);
      m->cdf[i] = acc;
    }
  }
  return m;
}

}  // namespace

BetaGaussianParams::BetaGaussianParams(std::vector<double> mu, std::vector<double> sigma, EntropicIndex rho)
    : mu_(std::move(mu)), sigma_(std::move(sigma)), rho_(rho) {
  require_supported(rho_);
  if (mu_.size() != sigma_.size()) throw DomainError("mu and sigma dimensions differ");
  for (double s : sigma_) {
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("sigma entries must be positive and finite");
  }
  for (double v : mu_) {
    if (!std::isfinite(v)) throw DomainError("mu entries must be finite");
  }
}

const StandardMember& standard_member(EntropicIndex rho) {
  require_supported(rho);
  static std::mutex mutex;
  static std::map<double, std::unique_ptr<StandardMember>> cache;
  const double key = rho.is_unit() ? 1.0 : rho.value();
  std::lock_guard lock(mutex);
  auto& slot = cache[key];
  if (!slot) slot = build_member(rho);
  return *slot;
}

double standard_pdf(double u, const StandardMember& m) {
  if (std::isinf(m.radius)) return normal_pdf(u);
  const double t = u / m.radius;
  if (t * t >= 1.0) return 0.0;
  const double p = 1.0 / (m.rho - 1.0);
  // a^p (1 - t^2)^p, in logs so that rho near 1 stays accurate.
  return std::exp(p * (std::log(m.bracket) + std::log1p(-t * t)));
}

double standard_cdf(double u, const StandardMember& m) {
  if (std::isinf(m.radius)) return normal_cdf(u);
  if (u <= -m.radius) return 0.0;
  if (u >= m.radius) return 1.0;
  const double half = table_half_width(m);
  if (u <= m.knots.front()) return 0.0;
  if (u >= m.knots.back()) return std::min(m.cdf.back(), 1.0);
  const double step = 2.0 * half / static_cast<double>(kCdfKnots - 1);
  auto i = static_cast<std::size_t>((u + half) / step);
  i = std::min(i, kCdfKnots - 2);
  const GaussLegendre& seg = gauss_legendre(kSegmentNodes);
  const double partial = seg.integrate([&](double v) { return standard_pdf(v, m); }, m.knots[i], u);
  return std::clamp(m.cdf[i] + partial, 0.0, 1.0);
}

double standard_quantile(double p, const StandardMember& m) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  // Bracket from the knot table, then Newton steps safeguarded by bisection.
  const auto it = std::upper_bound(m.cdf.begin(), m.cdf.end(), p);
  std::size_t hi_idx = static_cast<std::size_t>(it - m.cdf.begin());
  hi_idx = std::clamp<std::size_t>(hi_idx, 1, kCdfKnots - 1);
  double lo = m.knots[hi_idx - 1];
  double hi = m.knots[hi_idx];
  if (!std::isinf(m.radius)) {
    lo = std::max(lo, -m.radius);
    hi = std::min(hi, m.radius);
  }
  const double c_lo = m.cdf[hi_idx - 1];
  const double c_hi = m.cdf[hi_idx];
  double u = c_hi > c_lo ? lo + (hi - lo) * (p - c_lo) / (c_hi - c_lo) : 0.5 * (lo + hi);
  u = std::clamp(u, lo, hi);

  for (int iter = 0; iter < 200; ++iter) {
    const double f = standard_cdf(u, m) - p;
    if (std::abs(f) < kQuantileTolerance) return u;
    if (f > 0.0) {
      hi = u;
    } else {
      lo = u;
    }
    const double d = standard_pdf(u, m);
    double next = d > 0.0 ? u - f / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(u))) return next;
    u = next;
  }
  throw NumericFailure("inverse CDF did not converge", std::abs(standard_cdf(u, m) - p));
}

double pdf(const BetaGaussianParams& params, std::span<const double> z) {
  if (z.size() != params.dim()) throw DomainError("pdf: dimension mismatch");
  const StandardMember& m = standard_member(params.rho());
  double density = 1.0;
  for (std::size_t d = 0; d < z.size(); ++d) {
    const double s = params.sigma()[d];
    density *= standard_pdf((z[d] - params.mu()[d]) / s, m) / s;
  }
  return density;
}

double support_radius(const BetaGaussianParams& params, std::size_t dim) {
  return params.sigma().at(dim) * standard_member(params.rho()).radius;
}

double sample_standard(const StandardMember& member, Rng& rng) { return standard_quantile(rng.uniform(), member); }

Eigen::MatrixXd sample(const BetaGaussianParams& params, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sample count must be at least 1");
  const StandardMember& m = standard_member(params.rho());
  Rng rng(seed);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(params.dim()));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index d = 0; d < out.cols(); ++d) {
      const auto du = static_cast<std::size_t>(d);
      out(i, d) = params.mu()[du] + params.sigma()[du] * sample_standard(m, rng);
    }
  }
  return out;
}

ScalarRegularizer fy_regularizer_1d(double mu, double sigma, const StandardMember& m) {
  if (std::isinf(m.radius)) {
    // KL(N(mu, sigma^2) || N(0, 1)).
    return {0.5 * (mu * mu + sigma * sigma - 1.0) - std::log(sigma), mu, sigma - 1.0 / sigma};
  }
  // Omega*(eta) - E_q[eta] + Omega(q) with E_q[eta] = -(mu^2 + sigma^2 v) / 2
  // and Omega(q) = (sigma^(1-rho) M - 1) / (rho (rho - 1)); the constant parts
  // cancel against the cached conjugate, leaving the form below.
  const double r = m.rho;
  const double v = m.variance;
  const double power = m.power_integral;
  const double scale_term = power * std::expm1((1.0 - r) * std::log(sigma)) / (r * (r - 1.0));
  const double value = 0.5 * mu * mu + 0.5 * v * (sigma * sigma - 1.0) + scale_term;
  const double d_sigma = v * sigma - power * std::pow(sigma, -r) / r;
  return {value, mu, d_sigma};
}

namespace {
void require_matching(const BetaGaussianParams& params, EntropicIndex rho_reg) {
  const bool same = (params.rho().is_unit() && rho_reg.is_unit()) || params.rho().value() == rho_reg.value();
  if (!same) throw DomainError("regularizer index must match the posterior family index");
}
}  // namespace

double fy_regularizer(const BetaGaussianParams& params, StandardNormalScore, EntropicIndex rho_reg) {
  require_matching(params, rho_reg);
  const StandardMember& m = standard_member(params.rho());
  double total = 0.0;
  for (std::size_t d = 0; d < params.dim(); ++d) total += fy_regularizer_1d(params.mu()[d], params.sigma()[d], m).value;
  return total;
}

RegularizerGradient fy_regularizer_gradient(const BetaGaussianParams& params, StandardNormalScore,
                                            EntropicIndex rho_reg) {
  require_matching(params, rho_reg);
  const StandardMember& m = standard_member(params.rho());
  RegularizerGradient g{std::vector<double>(params.dim()), std::vector<double>(params.dim())};
  for (std::size_t d = 0; d < params.dim(); ++d) {
    const ScalarRegularizer s = fy_regularizer_1d(params.mu()[d], params.sigma()[d], m);
    g.d_mu[d] = s.d_mu;
    g.d_sigma[d] = s.d_sigma;
  }
  return g;
}

}  // namespace fyvi
