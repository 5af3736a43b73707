#ifndef FYVI_FYEM_GMM_HPP
#define FYVI_FYEM_GMM_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fyvi/simplex_maps.hpp"

namespace fyvi {

/// Observations (rows of `x`) with optional ground-truth labels used only for
/// evaluation. Outliers carry label -1.
struct Dataset {
  Eigen::MatrixXd x;
  std::vector<int> labels;

  std::size_t size() const noexcept { return static_cast<std::size_t>(x.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(x.cols()); }
};

/// Mixture parameters between iterations.
///
/// `eta` holds the canonical prior scores: log pi for rho = 1 and for the
/// zero regularizer (hard EM learns proportions like classification EM),
/// pi^(rho-1) / (rho-1) for other Tsallis indices (pi itself at rho = 2).
struct GmmState {
  std::vector<double> eta;
  Eigen::MatrixXd means;                     ///< K x D
  std::vector<Eigen::MatrixXd> covariances;  ///< K matrices, D x D
  Regularizer omega = Regularizer::tsallis(1.0);

  std::size_t components() const noexcept { return eta.size(); }
};

/// Row-stochastic N x K matrix; row i is the variational distribution q_i.
struct Responsibilities {
  Eigen::MatrixXd q;
  std::vector<std::vector<std::size_t>> support;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(q.rows()); }
  std::size_t components() const noexcept { return static_cast<std::size_t>(q.cols()); }
  /// Builds the support sets from the entries of `q`.
  static Responsibilities from_matrix(Eigen::MatrixXd q);
};

inline constexpr double kCovarianceJitter = 1e-6;
inline constexpr double kEmptyComponentMass = 1e-10;

struct InitSpec {
  std::uint64_t seed = 0;
  double mean_low = 0.0;
  double mean_high = 0.1;
};

/// Means uniform on [mean_low, mean_high]^D, identity covariances, and the
/// canonical scores of uniform mixing proportions.
GmmState initialize(const Dataset& data, std::size_t components, const Regularizer& omega, const InitSpec& init);

/// Mixing proportions pi = prediction_map(eta); softmax(eta) for hard EM.
Distribution mixing_proportions(const GmmState& state);

/// Canonical prior scores for mixing proportions `pi`; the inverse of
/// mixing_proportions on the canonical representatives.
std::vector<double> canonical_scores(std::span<const double> pi, const Regularizer& omega);

/// Prior score added to the component log-densities in the E-step:
/// log pi (rho = 1 and zero), pi^(rho-1) / (rho-1) (other Tsallis rho).
std::vector<double> prior_scores(const GmmState& state);

/// N x K matrix of log N(x_i; mu_k, Sigma_k) via Cholesky factors. Throws
/// CovarianceError naming the first component that fails to factorize.
Eigen::MatrixXd log_densities(const GmmState& state, const Dataset& data);

/// q_i = prediction_map(prior_score + log N(x_i; .)) for every row.
Responsibilities e_step(const GmmState& state, const Dataset& data);

/// Weighted maximum likelihood for the means and covariances plus the
/// eta-update Pi(eta) = column mean of resp. Components whose column mass is
/// below kEmptyComponentMass keep their parameters from `previous` (or the
/// identity / global mean when there is none).
GmmState m_step(const Dataset& data, const Responsibilities& resp, const Regularizer& omega,
                const GmmState* previous = nullptr);

/// Free energy sum_i E_{q_i}[-log N(x_i; Z)] + L_Omega(eta; q_i). Zero-mass
/// entries are skipped, so -inf log-densities never meet a 0 weight. For the
/// zero regularizer the prior term is -<q_i, log pi> (classification EM).
double fyvfe(const GmmState& state, const Dataset& data, const Responsibilities& resp);

struct FitResult {
  GmmState state;
  Responsibilities resp;
  std::vector<double> trace;  ///< free energy after each E+M pass
  std::size_t iterations = 0;
};

inline constexpr std::size_t kDefaultMaxIter = 200;
inline constexpr double kDefaultTolerance = 1e-8;

/// Alternates e_step and m_step until the free energy changes by less than
/// `tol` or `max_iter` passes have run.
FitResult fit(const Dataset& data, std::size_t components, const Regularizer& omega, const InitSpec& init,
              std::size_t max_iter = kDefaultMaxIter, double tol = kDefaultTolerance);

/// Same, starting from a given state.
FitResult fit_from(const Dataset& data, GmmState initial, std::size_t max_iter = kDefaultMaxIter,
                   double tol = kDefaultTolerance);

/// Mean over rows of the number of zero-probability components. Dense maps
/// (Tsallis rho <= 1) report 0: their zeros are floating-point underflow,
/// not excluded components.
double e_step_sparsity(const Responsibilities& resp, const Regularizer& omega);

/// Argmax of each responsibility row, ties to the lowest index.
std::vector<int> hard_labels(const Responsibilities& resp);

}  // namespace fyvi

#endif  // FYVI_FYEM_GMM_HPP
