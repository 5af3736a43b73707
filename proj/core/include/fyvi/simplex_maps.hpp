#ifndef FYVI_SIMPLEX_MAPS_HPP
#define FYVI_SIMPLEX_MAPS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fyvi/deformed_math.hpp"

namespace fyvi {

/// A point of the probability simplex together with its support.
///
/// Invariant: entries are non-negative, sum to one within `kSumTolerance`,
/// and `support()` lists exactly the indices of strictly positive entries in
/// increasing order.
class Distribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  /// Validates and wraps `probs`. Throws DomainError on negative or
  /// non-finite entries, an empty vector, or a sum away from one.
  explicit Distribution(std::vector<double> probs);

  /// Point mass on `index` out of `size` outcomes.
  static Distribution one_hot(std::size_t size, std::size_t index);
  static Distribution uniform(std::size_t size);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t k) const noexcept { return probs_[k]; }
  std::span<const double> probs() const noexcept { return probs_; }
  const std::vector<std::size_t>& support() const noexcept { return support_; }

 private:
  std::vector<double> probs_;
  std::vector<std::size_t> support_;
};

/// The convex regularizer Omega of a prediction map: a Tsallis negentropy
/// with some entropic index, or the zero function (argmax / hard map).
class Regularizer {
 public:
  static Regularizer tsallis(double rho) { return Regularizer(EntropicIndex(rho)); }
  static Regularizer tsallis(EntropicIndex rho) { return Regularizer(rho); }
  static Regularizer zero() { return Regularizer(std::nullopt); }

  bool is_zero() const noexcept { return !rho_.has_value(); }
  /// Throws std::logic_error for the zero regularizer.
  EntropicIndex index() const;
  /// True for Tsallis indices above one, whose maps can return exact zeros.
  bool is_sparse() const noexcept;

 private:
  explicit Regularizer(std::optional<EntropicIndex> rho) : rho_(rho) {}
  std::optional<EntropicIndex> rho_;
};

/// Entries below this value are cut to zero by sparse maps.
inline constexpr double kTruncation = 1e-12;

/// Bisection controls for the general rho-entmax threshold.
inline constexpr double kBisectionTolerance = 1e-10;
inline constexpr int kBisectionMaxIter = 200;

/// Tsallis negentropy sum_k (q_k^rho - q_k) / (rho (rho - 1)); the Shannon
/// negentropy sum_k q_k log q_k at rho = 1 (0 log 0 := 0).
double tsallis_negentropy(std::span<const double> q, EntropicIndex rho);
double tsallis_negentropy(const Distribution& q, EntropicIndex rho);

/// Omega(q): the Tsallis negentropy, or 0 for the zero regularizer.
double negentropy(std::span<const double> q, const Regularizer& omega);

// Closed-form and iterative maps. All return dense probability vectors.
std::vector<double> softmax(std::span<const double> eta);
/// Euclidean projection onto the simplex (sort-based).
std::vector<double> sparsemax(std::span<const double> eta);
/// rho-entmax by bisection on the threshold; valid for any rho > 0 including
/// 1 and 2. Throws NumericFailure if the normalization residual stays above
/// kBisectionTolerance after kBisectionMaxIter steps.
std::vector<double> entmax_bisect(std::span<const double> eta, EntropicIndex rho);
/// 1/m on each of the m exact maximizers.
std::vector<double> argmax_map(std::span<const double> eta);

/// Omega-regularized prediction map argmax_q <q, eta> - Omega(q).
///
/// The Tsallis map uses the threshold form q_k = exp_{2-rho}(eta_k - tau),
/// which needs no rescaling of the scores: it is softmax at rho = 1 and the
/// simplex projection at rho = 2. Dispatch: rho = 1 softmax, rho = 2
/// sparsemax, other rho bisection, zero regularizer argmax. For rho > 1
/// entries below kTruncation are set to zero and the rest renormalized.
Distribution prediction_map(std::span<const double> eta, const Regularizer& omega);

/// Convex conjugate Omega*(eta) = <q*, eta> - Omega(q*), q* the prediction map.
double conjugate(std::span<const double> eta, const Regularizer& omega);

/// Fenchel-Young loss Omega*(eta) - <q, eta> + Omega(q); non-negative and zero
/// iff q is the prediction map of eta.
double fy_loss(std::span<const double> eta, const Distribution& q, const Regularizer& omega);

/// Gradient of fy_loss with respect to eta: prediction_map(eta) - q.
std::vector<double> fy_loss_score_gradient(std::span<const double> eta, const Distribution& q,
                                           const Regularizer& omega);

/// Fenchel-Young posterior over a finite latent:
/// argmin_q E_q[loss] + L_Omega(eta; q) = prediction_map(eta - loss).
Distribution fyvi_solve(std::span<const double> eta, std::span<const double> loss,
                        const Regularizer& omega);

/// Two-outcome FY loss on scores (score, 0) against the target (x, 1 - x),
/// as used by per-pixel binary observation models. rho = 1 gives the
/// logistic loss, rho = 2 the binary sparsemax loss; other indices fall back
/// to the general routines.
struct BinaryFyLoss {
  double loss;
  double prob;      ///< prediction-map mass on outcome "1"
  double gradient;  ///< d loss / d score = prob - x
};
BinaryFyLoss binary_fy_loss(double score, double x, EntropicIndex rho);

}  // namespace fyvi

#endif  // FYVI_SIMPLEX_MAPS_HPP
