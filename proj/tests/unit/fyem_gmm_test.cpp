#include "fyvi/fyem_gmm.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "fyvi/cluster_bench.hpp"
#include "fyvi/errors.hpp"
#include "fyvi/rng.hpp"
#include "oracles/oracles.hpp"

namespace fyvi {
namespace {

Dataset three_blobs(std::uint64_t seed, std::size_t per = 40) {
  Rng rng(seed);
  const double centers[3][2] = {{-2.0, 0.0}, {2.0, 0.5}, {0.0, 3.0}};
  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(3 * per), 2);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < per; ++i) {
      const auto r = static_cast<Eigen::Index>(c * per + i);
      d.x(r, 0) = centers[c][0] + 0.6 * rng.normal();
      d.x(r, 1) = centers[c][1] + 0.6 * rng.normal();
      d.labels.push_back(static_cast<int>(c));
    }
  }
  return d;
}

GmmState two_component_state(const Regularizer& omega) {
  GmmState s;
  s.omega = omega;
  s.means = Eigen::MatrixXd(2, 2);
  s.means << -1.0, 0.0, 1.0, 0.0;
  s.covariances = {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)};
  s.eta = canonical_scores(std::vector<double>{0.5, 0.5}, omega);
  return s;
}

oracle::MixtureSnapshot snapshot(const GmmState& s) {
  oracle::MixtureSnapshot o;
  const Distribution pi = mixing_proportions(s);
  o.weights.assign(pi.probs().begin(), pi.probs().end());
  o.means = s.means;
  o.covariances = s.covariances;
  return o;
}

double state_distance(const GmmState& s, const oracle::MixtureSnapshot& o) {
  double d = (s.means - o.means).cwiseAbs().maxCoeff();
  const Distribution pi = mixing_proportions(s);
  for (std::size_t k = 0; k < o.weights.size(); ++k) {
    d = std::max(d, std::abs(pi[k] - o.weights[k]));
    d = std::max(d, (s.covariances[k] - o.covariances[k]).cwiseAbs().maxCoeff());
  }
  return d;
}

TEST(EStep, SingleComponentIsOne) {
  const Dataset d = three_blobs(1);
  for (const auto& omega : {Regularizer::tsallis(1.0), Regularizer::tsallis(2.0), Regularizer::zero()}) {
    const GmmState s = initialize(d, 1, omega, {});
    const Responsibilities r = e_step(s, d);
    EXPECT_TRUE((r.q.array() == 1.0).all());
  }
}

TEST(EStep, EquidistantPointSplitsEvenly) {
  Dataset d;
  d.x = Eigen::MatrixXd(1, 2);
  d.x << 0.0, 3.0;
  for (double rho : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    const Responsibilities r = e_step(two_component_state(Regularizer::tsallis(rho)), d);
    EXPECT_NEAR(r.q(0, 0), 0.5, 1e-12) << rho;
    EXPECT_NEAR(r.q(0, 1), 0.5, 1e-12) << rho;
  }
}

TEST(EStep, SparsemaxZeroesDistantComponent) {
  // Unit covariances: B at distance sqrt(20) from x is 10 nats below A.
  GmmState s = two_component_state(Regularizer::tsallis(2.0));
  Dataset d;
  d.x = Eigen::MatrixXd(1, 2);
  d.x << -1.0, 0.0;
  s.means(1, 0) = -1.0 + std::sqrt(20.0);  // (sqrt 20)^2 / 2 = 10 nats
  const Eigen::MatrixXd ld = log_densities(s, d);
  ASSERT_NEAR(ld(0, 0) - ld(0, 1), 10.0, 1e-12);
  const Responsibilities r = e_step(s, d);
  EXPECT_EQ(r.q(0, 0), 1.0);
  EXPECT_EQ(r.q(0, 1), 0.0);
  EXPECT_EQ(r.support[0], (std::vector<std::size_t>{0}));
}

TEST(EStep, SingularCovarianceNamesComponent) {
  GmmState s = two_component_state(Regularizer::tsallis(1.0));
  s.covariances[1] = Eigen::MatrixXd::Zero(2, 2);
  const Dataset d = three_blobs(2);
  try {
    e_step(s, d);
    FAIL() << "expected CovarianceError";
  } catch (const CovarianceError& e) {
    EXPECT_EQ(e.component(), 1u);
  }
}

TEST(LogDensities, MatchClosedForm) {
  const Dataset d = three_blobs(3);
  GmmState s = two_component_state(Regularizer::tsallis(1.0));
  s.covariances[0] << 2.0, 0.3, 0.3, 0.5;
  const Eigen::MatrixXd ld = log_densities(s, d);
  const Eigen::Matrix2d inv = s.covariances[0].inverse();
  const double det = s.covariances[0].determinant();
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    const Eigen::Vector2d v = d.x.row(i).transpose() - s.means.row(0).transpose();
    const double expected = -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det) - 0.5 * v.dot(inv * v);
    EXPECT_NEAR(ld(i, 0), expected, 1e-12);
  }
}

TEST(MStep, OneHotGivesClusterMeans) {
  const Dataset d = three_blobs(4);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(d.x.rows(), 3);
  for (Eigen::Index i = 0; i < q.rows(); ++i) q(i, d.labels[static_cast<std::size_t>(i)]) = 1.0;
  const GmmState s = m_step(d, Responsibilities::from_matrix(q), Regularizer::tsallis(2.0));
  for (int c = 0; c < 3; ++c) {
    Eigen::RowVector2d mean = Eigen::RowVector2d::Zero();
    for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
      if (d.labels[static_cast<std::size_t>(i)] == c) mean += d.x.row(i);
    }
    mean /= 40.0;
    EXPECT_LT((s.means.row(c) - mean).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(MStep, UniformRowsGiveGlobalMean) {
  const Dataset d = three_blobs(5);
  const Eigen::MatrixXd q = Eigen::MatrixXd::Constant(d.x.rows(), 4, 0.25);
  const GmmState s = m_step(d, Responsibilities::from_matrix(q), Regularizer::tsallis(1.0));
  const Eigen::RowVectorXd global = d.x.colwise().mean();
  for (Eigen::Index k = 0; k < 4; ++k) EXPECT_LT((s.means.row(k) - global).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MStep, EtaRoundTrip) {
  Dataset d;
  d.x = Eigen::MatrixXd::Random(4, 2);
  Eigen::MatrixXd q(4, 2);
  q << 1, 0, 0, 1, 0, 1, 0, 1;
  const GmmState s = m_step(d, Responsibilities::from_matrix(q), Regularizer::tsallis(1.0));
  EXPECT_NEAR(s.eta[0], std::log(0.25), 1e-15);
  EXPECT_NEAR(s.eta[1], std::log(0.75), 1e-15);
  const Distribution pi = mixing_proportions(s);
  EXPECT_NEAR(pi[0], 0.25, 1e-15);
  EXPECT_NEAR(pi[1], 0.75, 1e-15);

  const GmmState s2 = m_step(d, Responsibilities::from_matrix(q), Regularizer::tsallis(2.0));
  EXPECT_NEAR(s2.eta[0], 0.25, 1e-15);
  EXPECT_NEAR(s2.eta[1], 0.75, 1e-15);
}

TEST(MStep, CanonicalScoresRoundTripForGeneralRho) {
  Rng rng(6);
  for (double rho : {0.5, 1.0, 1.1, 1.5, 2.0, 3.0}) {
    const Regularizer omega = Regularizer::tsallis(rho);
    for (int i = 0; i < 50; ++i) {
      std::vector<double> pi(5);
      double sum = 0.0;
      for (auto& v : pi) sum += (v = 0.05 + rng.uniform());
      for (auto& v : pi) v /= sum;
      const Distribution back = prediction_map(canonical_scores(pi, omega), omega);
      for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(back[k], pi[k], 1e-9) << rho;
    }
  }
}

TEST(MStep, CovariancesSymmetricPositiveDefinite) {
  const Dataset d = three_blobs(7);
  const FitResult f = fit(d, 3, Regularizer::tsallis(1.5), {7}, 30, 0.0);
  for (const auto& c : f.state.covariances) {
    EXPECT_LT((c - c.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues().minCoeff(), kCovarianceJitter * 0.999);
  }
}

TEST(MStep, EmptyComponentKeepsPreviousParameters) {
  const Dataset d = three_blobs(8);
  GmmState prev = initialize(d, 3, Regularizer::tsallis(2.0), {8});
  prev.means(2, 0) = 42.0;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(d.x.rows(), 3);
  q.col(0).setConstant(0.5);
  q.col(1).setConstant(0.5);
  const GmmState s = m_step(d, Responsibilities::from_matrix(q), Regularizer::tsallis(2.0), &prev);
  EXPECT_EQ(s.means(2, 0), 42.0);
  EXPECT_EQ(s.covariances[2], prev.covariances[2]);
  EXPECT_TRUE(std::isfinite(s.eta[2]));
  EXPECT_NO_THROW(e_step(s, d));
}

TEST(MStep, ZeroResponsibilityIgnoresSample) {
  const Dataset d = three_blobs(9);
  const GmmState s0 = initialize(d, 3, Regularizer::tsallis(2.0), {9});
  const FitResult f = fit_from(d, s0, 5, 0.0);
  const Responsibilities r = e_step(f.state, d);
  // Find a row excluded from some component.
  Eigen::Index row = -1, comp = -1;
  for (Eigen::Index i = 0; i < r.q.rows() && row < 0; ++i) {
    for (Eigen::Index k = 0; k < 3; ++k) {
      if (r.q(i, k) == 0.0) {
        row = i;
        comp = k;
        break;
      }
    }
  }
  ASSERT_GE(row, 0);
  Dataset moved = d;
  moved.x.row(row) += Eigen::RowVector2d(5.0, -3.0);
  const GmmState a = m_step(d, r, Regularizer::tsallis(2.0));
  const GmmState b = m_step(moved, r, Regularizer::tsallis(2.0));
  EXPECT_EQ(a.means.row(comp), b.means.row(comp));
  EXPECT_EQ(a.covariances[static_cast<std::size_t>(comp)], b.covariances[static_cast<std::size_t>(comp)]);
}

TEST(Fyvfe, SingleComponentIsNegativeLogLikelihood) {
  const Dataset d = three_blobs(10);
  const GmmState s = m_step(d, Responsibilities::from_matrix(Eigen::MatrixXd::Ones(d.x.rows(), 1)),
                            Regularizer::tsallis(1.5));
  const double nll = -log_densities(s, d).sum();
  EXPECT_NEAR(fyvfe(s, d, e_step(s, d)), nll, 1e-9 * std::abs(nll));
}

TEST(Fyvfe, EStepIsOptimal) {
  const Dataset d = three_blobs(11);
  Rng rng(11);
  for (const auto& omega : {Regularizer::tsallis(1.0), Regularizer::tsallis(1.5), Regularizer::tsallis(2.0)}) {
    const GmmState s = fit(d, 3, omega, {11}, 3, 0.0).state;
    const Responsibilities best = e_step(s, d);
    const double f0 = fyvfe(s, d, best);
    for (int t = 0; t < 20; ++t) {
      Eigen::MatrixXd q = best.q;
      for (Eigen::Index i = 0; i < q.rows(); ++i) {
        for (Eigen::Index k = 0; k < q.cols(); ++k) q(i, k) = 0.8 * q(i, k) + 0.2 * rng.uniform();
        q.row(i) /= q.row(i).sum();
      }
      EXPECT_LE(f0, fyvfe(s, d, Responsibilities::from_matrix(q)) + 1e-9);
    }
  }
}

TEST(Fit, ClassicalEmTrajectory) {
  const Dataset d = three_blobs(12, 60);
  const GmmState init = initialize(d, 3, Regularizer::tsallis(1.0), {12, -1.0, 1.0});
  const auto expected = oracle::classical_em(d.x, snapshot(init), 50, kCovarianceJitter);
  GmmState s = init;
  for (std::size_t t = 0; t < 50; ++t) {
    s = m_step(d, e_step(s, d), s.omega, &s);
    ASSERT_LT(state_distance(s, expected[t]), 1e-8) << "iteration " << t;
  }
  const FitResult f = fit_from(d, init, 50, 0.0);
  EXPECT_EQ(f.iterations, 50u);
  EXPECT_LT(state_distance(f.state, expected.back()), 1e-8);
}

TEST(Fit, HardMapIsClassificationEm) {
  const Dataset d = three_blobs(13, 60);
  GmmState init = initialize(d, 3, Regularizer::zero(), {13});
  init.means << -1.5, 0.0, 1.5, 0.0, 0.0, 2.0;
  const auto expected = oracle::classification_em(d.x, snapshot(init), 20, kCovarianceJitter);
  GmmState s = init;
  for (std::size_t t = 0; t < expected.size(); ++t) {
    const Responsibilities r = e_step(s, d);
    EXPECT_EQ(hard_labels(r), expected[t].labels) << t;
    s = m_step(d, r, s.omega, &s);
    ASSERT_LT(state_distance(s, expected[t].params), 1e-9) << t;
  }
}

TEST(Fit, TraceNonincreasing) {
  const Dataset d = three_blobs(14);
  for (const auto& omega : {Regularizer::tsallis(1.0), Regularizer::tsallis(1.5), Regularizer::tsallis(2.0),
                            Regularizer::tsallis(3.0), Regularizer::zero()}) {
    const FitResult f = fit(d, 3, omega, {14}, 100, 0.0);
    for (std::size_t t = 1; t < f.trace.size(); ++t) EXPECT_LE(f.trace[t], f.trace[t - 1] + 1e-8);
    for (Eigen::Index i = 0; i < f.resp.q.rows(); ++i) EXPECT_NEAR(f.resp.q.row(i).sum(), 1.0, 1e-9);
  }
}

TEST(Fit, DegenerateClustersConverge) {
  Dataset d;
  d.x = Eigen::MatrixXd(30, 2);
  for (Eigen::Index i = 0; i < 30; ++i) d.x.row(i) = Eigen::RowVector2d(static_cast<double>(i % 3) * 10.0, 0.0);
  GmmState init = initialize(d, 3, Regularizer::tsallis(2.0), {15});
  init.means << 1.0, 0.0, 9.0, 0.0, 21.0, 0.0;
  const FitResult f = fit_from(d, init, 200, 1e-8);
  const auto labels = hard_labels(f.resp);
  for (Eigen::Index i = 0; i < 30; ++i) EXPECT_EQ(labels[static_cast<std::size_t>(i)], static_cast<int>(i % 3));
  EXPECT_LT(f.iterations, 200u);
  EXPECT_NEAR(f.trace.back(), f.trace[f.trace.size() - 2], 1e-8);
}

TEST(Fit, RejectsBadArguments) {
  const Dataset d = three_blobs(16, 1);
  EXPECT_THROW(fit(d, 4, Regularizer::tsallis(1.0), {}), std::invalid_argument);
  EXPECT_THROW(fit(d, 2, Regularizer::tsallis(1.0), {}, 0), std::invalid_argument);
}

TEST(Sparsity, Counts) {
  EXPECT_EQ(e_step_sparsity(Responsibilities::from_matrix(Eigen::MatrixXd::Constant(5, 4, 0.25)),
                            Regularizer::tsallis(2.0)),
            0.0);
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(6, 4);
  for (Eigen::Index i = 0; i < 6; ++i) onehot(i, i % 4) = 1.0;
  EXPECT_EQ(e_step_sparsity(Responsibilities::from_matrix(onehot), Regularizer::tsallis(2.0)), 3.0);
  EXPECT_EQ(e_step_sparsity(Responsibilities::from_matrix(onehot), Regularizer::zero()), 3.0);
  // Dense maps report no excluded components.
  EXPECT_EQ(e_step_sparsity(Responsibilities::from_matrix(onehot), Regularizer::tsallis(1.0)), 0.0);
}

TEST(Sparsity, SparseEmOnBenchmarkStrictlyBetween) {
  BenchmarkSpec spec;
  spec.seed = data_seed(0);
  const Dataset d = generate(spec);
  const FitResult f = fit(d, 4, Regularizer::tsallis(2.0), {init_seed(0)});
  const double s = e_step_sparsity(f.resp, Regularizer::tsallis(2.0));
  EXPECT_GT(s, 0.0);
  EXPECT_LT(s, 3.0);
}

TEST(HardLabels, TiesToLowestIndex) {
  Eigen::MatrixXd q(2, 3);
  q << 0.5, 0.0, 0.5, 0.2, 0.4, 0.4;
  EXPECT_EQ(hard_labels(Responsibilities::from_matrix(q)), (std::vector<int>{0, 1}));
}

}  // namespace
}  // namespace fyvi
