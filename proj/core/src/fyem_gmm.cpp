#include "fyvi/fyem_gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fyvi/errors.hpp"
#include "fyvi/rng.hpp"

namespace fyvi {

namespace {

double row_dot(const Eigen::MatrixXd& q, Eigen::Index i, std::span<const double> v) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    if (q(i, k) != 0.0) s += q(i, k) * v[static_cast<std::size_t>(k)];
  }
  return s;
}

}  // namespace

Responsibilities Responsibilities::from_matrix(Eigen::MatrixXd q) {
  Responsibilities r;
  r.support.resize(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index k = 0; k < q.cols(); ++k) {
      if (q(i, k) > 0.0) r.support[static_cast<std::size_t>(i)].push_back(static_cast<std::size_t>(k));
    }
  }
  r.q = std::move(q);
  return r;
}

std::vector<double> canonical_scores(std::span<const double> pi, const Regularizer& omega) {
  std::vector<double> eta(pi.size(), 0.0);
  const bool log_scores = omega.is_zero() || omega.index().is_unit();
  for (std::size_t k = 0; k < pi.size(); ++k) {
    if (log_scores) {
      eta[k] = std::log(pi[k]);
    } else {
      const double c = omega.index().value() - 1.0;
      eta[k] = std::pow(pi[k], c) / c;
    }
  }
  return eta;
}

GmmState initialize(const Dataset& data, std::size_t components, const Regularizer& omega, const InitSpec& init) {
  if (components == 0) throw std::invalid_argument("need at least one component");
  const auto K = static_cast<Eigen::Index>(components);
  const auto D = static_cast<Eigen::Index>(data.dim());
  Rng rng(init.seed);
  GmmState s;
  s.omega = omega;
  s.means.resize(K, D);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index d = 0; d < D; ++d) s.means(k, d) = rng.uniform(init.mean_low, init.mean_high);
  }
  s.covariances.assign(components, Eigen::MatrixXd::Identity(D, D));
  const std::vector<double> uniform(components, 1.0 / static_cast<double>(components));
  s.eta = canonical_scores(uniform, omega);
  return s;
}

// Hard EM keeps log-proportions, so its proportions are the softmax of eta.
Distribution mixing_proportions(const GmmState& state) {
  return prediction_map(state.eta, state.omega.is_zero() ? Regularizer::tsallis(1.0) : state.omega);
}

std::vector<double> prior_scores(const GmmState& state) {
  if (state.omega.is_zero()) return state.eta;
  const Distribution pi = mixing_proportions(state);
  return canonical_scores(pi.probs(), state.omega);
}

Eigen::MatrixXd log_densities(const GmmState& state, const Dataset& data) {
  const auto N = static_cast<Eigen::Index>(data.size());
  const auto D = static_cast<Eigen::Index>(data.dim());
  const auto K = static_cast<Eigen::Index>(state.components());
  if (state.means.rows() != K || state.means.cols() != D || state.covariances.size() != state.components()) {
    throw std::invalid_argument("mixture state does not match the data dimension");
  }
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  Eigen::MatrixXd out(N, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const Eigen::MatrixXd& cov = state.covariances[static_cast<std::size_t>(k)];
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw CovarianceError("covariance is not positive definite", static_cast<std::size_t>(k));
    }
    const Eigen::MatrixXd L = llt.matrixL();
    double log_det = 0.0;
    for (Eigen::Index d = 0; d < D; ++d) {
      if (!(L(d, d) > 0.0)) throw CovarianceError("singular covariance", static_cast<std::size_t>(k));
      log_det += 2.0 * std::log(L(d, d));
    }
    const Eigen::VectorXd mu = state.means.row(k).transpose();
    for (Eigen::Index i = 0; i < N; ++i) {
      const Eigen::VectorXd diff = data.x.row(i).transpose() - mu;
      const Eigen::VectorXd y = L.triangularView<Eigen::Lower>().solve(diff);
      out(i, k) = -0.5 * (static_cast<double>(D) * log_2pi + log_det + y.squaredNorm());
    }
  }
  return out;
}

Responsibilities e_step(const GmmState& state, const Dataset& data) {
  const Eigen::MatrixXd logn = log_densities(state, data);
  const std::vector<double> prior = prior_scores(state);
  const auto K = static_cast<std::size_t>(logn.cols());
  Eigen::MatrixXd q(logn.rows(), logn.cols());
  std::vector<double> scores(K);
  for (Eigen::Index i = 0; i < logn.rows(); ++i) {
    for (std::size_t k = 0; k < K; ++k) scores[k] = prior[k] + logn(i, static_cast<Eigen::Index>(k));
    const Distribution row = prediction_map(scores, state.omega);
    for (std::size_t k = 0; k < K; ++k) q(i, static_cast<Eigen::Index>(k)) = row[k];
  }
  return Responsibilities::from_matrix(std::move(q));
}

GmmState m_step(const Dataset& data, const Responsibilities& resp, const Regularizer& omega,
                const GmmState* previous) {
  const auto N = static_cast<Eigen::Index>(data.size());
  const auto D = static_cast<Eigen::Index>(data.dim());
  const auto K = static_cast<Eigen::Index>(resp.components());
  if (resp.q.rows() != N) throw std::invalid_argument("responsibilities do not match the data");
  if (previous && previous->components() != resp.components()) {
    throw std::invalid_argument("previous state has a different number of components");
  }

  GmmState s;
  s.omega = omega;
  s.means.resize(K, D);
  s.covariances.resize(static_cast<std::size_t>(K));
  std::vector<double> mass(static_cast<std::size_t>(K), 0.0);

  // Fixed-order reductions over i; zero weights are skipped outright so a
  // sample outside a component's support cannot influence it.
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    double nk = 0.0;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(D);
    for (Eigen::Index i = 0; i < N; ++i) {
      const double w = resp.q(i, k);
      if (w == 0.0) continue;
      nk += w;
      sum += w * data.x.row(i).transpose();
    }
    mass[ku] = nk;
    if (nk < kEmptyComponentMass) {
      if (previous) {
        s.means.row(k) = previous->means.row(k);
        s.covariances[ku] = previous->covariances[ku];
      } else {
        s.means.row(k) = data.x.colwise().mean();
        s.covariances[ku] = Eigen::MatrixXd::Identity(D, D);
      }
      continue;
    }
    const Eigen::VectorXd mu = sum / nk;
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(D, D);
    for (Eigen::Index i = 0; i < N; ++i) {
      const double w = resp.q(i, k);
      if (w == 0.0) continue;
      const Eigen::VectorXd diff = data.x.row(i).transpose() - mu;
      scatter.noalias() += w * diff * diff.transpose();
    }
    s.means.row(k) = mu.transpose();
    s.covariances[ku] = scatter / nk + kCovarianceJitter * Eigen::MatrixXd::Identity(D, D);
  }

  // eta-update: any eta with Pi(eta) = qbar; the canonical representative.
  std::vector<double> qbar(static_cast<std::size_t>(K));
  bool floored = false;
  for (std::size_t k = 0; k < qbar.size(); ++k) {
    qbar[k] = mass[k] / static_cast<double>(N);
    if (qbar[k] < kEmptyComponentMass) {
      qbar[k] = kEmptyComponentMass;
      floored = true;
    }
  }
  if (floored) {
    double total = 0.0;
    for (double v : qbar) total += v;
    for (double& v : qbar) v /= total;
  }
  s.eta = canonical_scores(qbar, omega);
  return s;
}

double fyvfe(const GmmState& state, const Dataset& data, const Responsibilities& resp) {
  const Eigen::MatrixXd logn = log_densities(state, data);
  if (resp.q.rows() != logn.rows() || resp.q.cols() != logn.cols()) {
    throw std::invalid_argument("responsibilities do not match the state and data");
  }
  // For hard EM the prior term is -<q_i, log pi>, the classification-EM
  // criterion, so eta is normalized by its log-partition rather than its max.
  const double conj = conjugate(state.eta, state.omega.is_zero() ? Regularizer::tsallis(1.0) : state.omega);
  std::vector<double> row(static_cast<std::size_t>(logn.cols()));
  double total = 0.0;
  for (Eigen::Index i = 0; i < logn.rows(); ++i) {
    double expected_loss = 0.0;
    for (std::size_t k : resp.support[static_cast<std::size_t>(i)]) {
      expected_loss -= resp.q(i, static_cast<Eigen::Index>(k)) * logn(i, static_cast<Eigen::Index>(k));
    }
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = resp.q(i, static_cast<Eigen::Index>(k));
    const double fy = conj - row_dot(resp.q, i, state.eta) + negentropy(row, state.omega);
    total += expected_loss + fy;
  }
  return total;
}

FitResult fit_from(const Dataset& data, GmmState initial, std::size_t max_iter, double tol) {
  if (max_iter == 0) throw std::invalid_argument("max_iter must be at least 1");
  FitResult result;
  result.state = std::move(initial);
  for (std::size_t it = 0; it < max_iter; ++it) {
    result.resp = e_step(result.state, data);
    result.state = m_step(data, result.resp, result.state.omega, &result.state);
    result.trace.push_back(fyvfe(result.state, data, result.resp));
    result.iterations = it + 1;
    const std::size_t n = result.trace.size();
    if (n >= 2 && std::abs(result.trace[n - 1] - result.trace[n - 2]) < tol) break;
  }
  return result;
}

FitResult fit(const Dataset& data, std::size_t components, const Regularizer& omega, const InitSpec& init,
              std::size_t max_iter, double tol) {
  if (data.size() < components) throw std::invalid_argument("need at least as many samples as components");
  return fit_from(data, initialize(data, components, omega, init), max_iter, tol);
}

double e_step_sparsity(const Responsibilities& resp, const Regularizer& omega) {
  if (resp.rows() == 0 || !(omega.is_zero() || omega.is_sparse())) return 0.0;
  double zeros = 0.0;
  for (const auto& s : resp.support) zeros += static_cast<double>(resp.components() - s.size());
  return zeros / static_cast<double>(resp.rows());
}

std::vector<int> hard_labels(const Responsibilities& resp) {
  std::vector<int> labels(resp.rows());
  for (Eigen::Index i = 0; i < resp.q.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < resp.q.cols(); ++k) {
      if (resp.q(i, k) > resp.q(i, best)) best = k;
    }
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

}  // namespace fyvi
