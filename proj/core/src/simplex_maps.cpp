#include "fyvi/simplex_maps.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fyvi/errors.hpp"

namespace fyvi {

namespace {

void require_nonempty_finite(std::span<const double> eta) {
  if (eta.empty()) throw DomainError("score vector must be non-empty");
  for (double v : eta) {
    if (!std::isfinite(v)) throw DomainError("score vector must be finite");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    // Zero-mass entries never contribute, even against huge scores.
    if (a[k] != 0.0) s += a[k] * b[k];
  }
  return s;
}

// exp_{2-rho}(x) = [1 + (rho-1) x]_+^(1/(rho-1)) with the common exponents
// special-cased; they dominate the sweep's run time.
struct DeformedExp {
  double c;  // rho - 1
  double p;  // 1 / (rho - 1)

  explicit DeformedExp(double rho) : c(rho - 1.0), p(1.0 / (rho - 1.0)) {}

  double operator()(double x) const {
    const double cx = c * x;
    const double b = 1.0 + cx;
    if (b <= 0.0) return p > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    if (p == 1.0) return b;
    if (p == 2.0) return b * b;
    if (p == 0.5) return std::sqrt(b);
    return std::exp(p * std::log1p(cx));
  }
};

void truncate_and_renormalize(std::vector<double>& q) {
  double sum = 0.0;
  for (double& v : q) {
    if (v < kTruncation) v = 0.0;
    sum += v;
  }
  for (double& v : q) v /= sum;
}

}  // namespace

// ---------------------------------------------------------------- Distribution

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw DomainError("distribution must have at least one outcome");
  double sum = 0.0;
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    const double v = probs_[k];
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("distribution entry " + std::to_string(k) + " is negative or non-finite");
    }
    sum += v;
    if (v > 0.0) support_.push_back(k);
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw DomainError("distribution sums to " + std::to_string(sum) + ", not 1");
  }
}

Distribution Distribution::one_hot(std::size_t size, std::size_t index) {
  std::vector<double> p(size, 0.0);
  p.at(index) = 1.0;
  return Distribution(std::move(p));
}

Distribution Distribution::uniform(std::size_t size) {
  return Distribution(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

// ----------------------------------------------------------------- Regularizer

EntropicIndex Regularizer::index() const {
  if (!rho_) throw std::logic_error("zero regularizer has no entropic index");
  return *rho_;
}

bool Regularizer::is_sparse() const noexcept { return rho_ && !rho_->is_unit() && rho_->value() > 1.0; }

// ------------------------------------------------------------------ negentropy

double tsallis_negentropy(std::span<const double> q, EntropicIndex rho) {
  double s = 0.0;
  if (rho.is_unit()) {
    for (double v : q) {
      if (v > 0.0) s += v * std::log(v);
    }
    return s;
  }
  const double r = rho.value();
  for (double v : q) {
    if (v > 0.0) s += v * std::expm1((r - 1.0) * std::log(v));
  }
  return s / (r * (r - 1.0));
}

double tsallis_negentropy(const Distribution& q, EntropicIndex rho) { return tsallis_negentropy(q.probs(), rho); }

double negentropy(std::span<const double> q, const Regularizer& omega) {
  return omega.is_zero() ? 0.0 : tsallis_negentropy(q, omega.index());
}

// ------------------------------------------------------------------------ maps

std::vector<double> softmax(std::span<const double> eta) {
  require_nonempty_finite(eta);
  const double mx = *std::max_element(eta.begin(), eta.end());
  std::vector<double> q(eta.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < eta.size(); ++k) {
    q[k] = std::exp(eta[k] - mx);
    sum += q[k];
  }
  for (double& v : q) v /= sum;
  return q;
}

std::vector<double> sparsemax(std::span<const double> eta) {
  require_nonempty_finite(eta);
  std::vector<double> sorted(eta.begin(), eta.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // Largest k with 1 + k z_(k) > sum_{j<=k} z_(j).
  double cumsum = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumsum += sorted[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] > t) tau = t;
  }
  std::vector<double> q(eta.size());
  for (std::size_t k = 0; k < eta.size(); ++k) q[k] = std::max(eta[k] - tau, 0.0);
  return q;
}

std::vector<double> entmax_bisect(std::span<const double> eta, EntropicIndex rho) {
  require_nonempty_finite(eta);
  const std::size_t n = eta.size();
  if (rho.is_unit()) return softmax(eta);

  // q_k = exp_{2-rho}(eta_k - tau). The mass is decreasing in tau; at
  // tau = max(eta) the top entry alone is 1, and at max(eta) + log_rho(K)
  // every entry is at most 1/K (log_rho(K) = -log_{2-rho}(1/K)).
  const DeformedExp expd(rho.value());
  const double mx = *std::max_element(eta.begin(), eta.end());
  double lo = mx;
  double hi = mx + log_rho(static_cast<double>(n), rho);

  std::vector<double> q(n);
  auto mass_at = [&](double tau) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      q[k] = expd(eta[k] - tau);
      s += q[k];
    }
    return s;
  };

  double residual = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int iter = 0; iter < kBisectionMaxIter; ++iter) {
    const double mid = 0.5 * (lo + hi);
    sum = mass_at(mid);
    residual = sum - 1.0;
    if (std::abs(residual) < kBisectionTolerance) break;
    if (residual > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (!(std::abs(residual) < kBisectionTolerance)) {
    throw NumericFailure("entmax bisection did not converge for rho = " + std::to_string(rho.value()),
                         std::abs(residual));
  }
  for (double& v : q) v /= sum;
  return q;
}

std::vector<double> argmax_map(std::span<const double> eta) {
  require_nonempty_finite(eta);
  const double mx = *std::max_element(eta.begin(), eta.end());
  const auto m = static_cast<double>(std::count(eta.begin(), eta.end(), mx));
  std::vector<double> q(eta.size(), 0.0);
  for (std::size_t k = 0; k < eta.size(); ++k) {
    if (eta[k] == mx) q[k] = 1.0 / m;
  }
  return q;
}

Distribution prediction_map(std::span<const double> eta, const Regularizer& omega) {
  if (omega.is_zero()) return Distribution(argmax_map(eta));
  const EntropicIndex rho = omega.index();
  if (rho.is_unit()) return Distribution(softmax(eta));
  std::vector<double> q = rho.value() == 2.0 ? sparsemax(eta) : entmax_bisect(eta, rho);
  if (rho.value() > 1.0) truncate_and_renormalize(q);
  return Distribution(std::move(q));
}

double conjugate(std::span<const double> eta, const Regularizer& omega) {
  require_nonempty_finite(eta);
  if (omega.is_zero()) return *std::max_element(eta.begin(), eta.end());
  if (omega.index().is_unit()) {
    const double mx = *std::max_element(eta.begin(), eta.end());
    double s = 0.0;
    for (double v : eta) s += std::exp(v - mx);
    return mx + std::log(s);
  }
  const Distribution q = prediction_map(eta, omega);
  return dot(q.probs(), eta) - negentropy(q.probs(), omega);
}

double fy_loss(std::span<const double> eta, const Distribution& q, const Regularizer& omega) {
  if (q.size() != eta.size()) throw std::invalid_argument("fy_loss: size mismatch");
  return conjugate(eta, omega) - dot(q.probs(), eta) + negentropy(q.probs(), omega);
}

std::vector<double> fy_loss_score_gradient(std::span<const double> eta, const Distribution& q,
                                           const Regularizer& omega) {
  if (q.size() != eta.size()) throw std::invalid_argument("fy_loss_score_gradient: size mismatch");
  const Distribution p = prediction_map(eta, omega);
  std::vector<double> g(eta.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = p[k] - q[k];
  return g;
}

Distribution fyvi_solve(std::span<const double> eta, std::span<const double> loss, const Regularizer& omega) {
  if (loss.size() != eta.size()) throw std::invalid_argument("fyvi_solve: size mismatch");
  std::vector<double> shifted(eta.size());
  for (std::size_t k = 0; k < eta.size(); ++k) shifted[k] = eta[k] - loss[k];
  return prediction_map(shifted, omega);
}

BinaryFyLoss binary_fy_loss(double score, double x, EntropicIndex rho) {
  if (rho.is_unit()) {
    // Omega*(score, 0) = softplus(score).
    const double softplus = score > 0.0 ? score + std::log1p(std::exp(-score)) : std::log1p(std::exp(score));
    const double prob = score >= 0.0 ? 1.0 / (1.0 + std::exp(-score)) : std::exp(score) / (1.0 + std::exp(score));
    double neg = 0.0;
    if (x > 0.0) neg += x * std::log(x);
    if (x < 1.0) neg += (1.0 - x) * std::log(1.0 - x);
    return {softplus - x * score + neg, prob, prob - x};
  }
  if (rho.value() == 2.0) {
    // sparsemax(score, 0) puts clip((score + 1) / 2, 0, 1) on outcome 1, and
    // Omega_2(p, 1-p) = p^2 - p.
    const double prob = std::clamp(0.5 * (score + 1.0), 0.0, 1.0);
    const double conj = prob * score - (prob * prob - prob);
    return {conj - x * score + (x * x - x), prob, prob - x};
  }
  const double eta[2] = {score, 0.0};
  const Distribution target({x, 1.0 - x});
  const Regularizer omega = Regularizer::tsallis(rho);
  const Distribution p = prediction_map(eta, omega);
  return {fy_loss(eta, target, omega), p[0], p[0] - x};
}

}  // namespace fyvi
