#include "fyvi/fyvae_toy.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fyvi/beta_gaussian.hpp"
#include "fyvi/rng.hpp"
#include "oracles/oracles.hpp"

namespace fyvi {
namespace {

VaeConfig micro_config(double rho, double rho_obs) {
  VaeConfig c;
  c.input_dim = 2;
  c.hidden1 = 2;
  c.hidden2 = 2;
  c.latent_dim = 1;
  c.rho_posterior = rho;
  c.rho_obs = rho_obs;
  c.beta = 0.5;
  return c;
}

// Initialized weights plus small random biases so no rectifier sits at a kink.
VaeParams micro_params(const VaeConfig& c, std::uint64_t seed) {
  VaeParams p = VaeParams::initialize(c, seed);
  Rng rng(seed + 1000);
  p.visit([&](const char*, Eigen::MatrixXd& m) {
    if (m.cols() == 1) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, 0) = 0.3 + 0.2 * rng.normal();
    }
  });
  return p;
}

// max |fd - analytic| / max |analytic| over every parameter tensor.
double worst_relative_gradient_error(const VaeParams& params, const Eigen::MatrixXd& batch, const VaeConfig& c,
                                     const Eigen::MatrixXd& eps) {
  const VaeLoss base = fyelbo_loss_with_noise(params, batch, c, eps);
  std::vector<Eigen::MatrixXd> analytic;
  base.grads.visit([&](const char*, const Eigen::MatrixXd& g) { analytic.push_back(g); });
  double num = 0.0;
  double den = 0.0;
  std::size_t t = 0;
  VaeParams work = params;
  work.visit([&](const char*, Eigen::MatrixXd& w) {
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double keep = w(i);
      w(i) = keep + 1e-5;
      const double up = fyelbo_loss_with_noise(work, batch, c, eps).loss;
      w(i) = keep - 1e-5;
      const double down = fyelbo_loss_with_noise(work, batch, c, eps).loss;
      w(i) = keep;
      const double fd = (up - down) / 2e-5;
      num = std::max(num, std::abs(fd - analytic[t](i)));
      den = std::max(den, std::abs(analytic[t](i)));
    }
    ++t;
  });
  return num / den;
}

TEST(VaeConfig, Validation) {
  VaeConfig c;
  EXPECT_NO_THROW(c.validate());
  c.hidden1 = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = VaeConfig{};
  c.beta = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = VaeConfig{};
  c.rho_posterior = 2.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = VaeConfig{};
  c.learning_rate = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(VaeParams, InitializationBounds) {
  const VaeConfig c;
  const VaeParams p = VaeParams::initialize(c, 3);
  p.visit([&](const char* name, const Eigen::MatrixXd& m) {
    if (m.cols() == 1 && std::string(name).find("_b") != std::string::npos) {
      EXPECT_TRUE(m.isZero()) << name;
    } else {
      EXPECT_LE(m.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(static_cast<double>(m.cols()))) << name;
    }
  });
  EXPECT_EQ(p.enc_w1.rows(), 32);
  EXPECT_EQ(p.enc_w1.cols(), 64);
  EXPECT_EQ(p.dec_w3.rows(), 64);
  EXPECT_EQ(p.mu_w.rows(), 4);
}

TEST(FyelboLoss, GradientsMatchFiniteDifferencesOnMicroArchitecture) {
  Eigen::MatrixXd batch(3, 2);
  batch << 1.0, 0.0, 0.3, 0.8, 0.0, 1.0;
  for (double rho : {1.0, 1.5, 2.0}) {
    for (double rho_obs : {1.0, 2.0}) {
      const VaeConfig c = micro_config(rho, rho_obs);
      const VaeParams p = micro_params(c, 17);
      const Eigen::MatrixXd eps = draw_latent_noise(3, c, 5);
      EXPECT_LT(worst_relative_gradient_error(p, batch, c, eps), 1e-4) << rho << ' ' << rho_obs;
    }
  }
}

TEST(FyelboLoss, GaussianBernoulliMatchesCrossEntropyPlusKl) {
  VaeConfig c;
  c.beta = 0.01;
  const VaeParams p = VaeParams::initialize(c, 4);
  const Eigen::MatrixXd batch = make_synthetic_digits(16, 4).images;
  const Eigen::MatrixXd eps = draw_latent_noise(16, c, 9);
  const VaeLoss l = fyelbo_loss_with_noise(p, batch, c, eps);
  EXPECT_NEAR(l.loss, oracle::gaussian_bernoulli_objective(p, batch, c.beta, eps), 1e-10);
  EXPECT_NEAR(l.regularizer, l.gaussian_kl, 1e-6);
}

TEST(FyelboLoss, SingleImageCrossEntropyOracle) {
  const VaeConfig c = micro_config(1.0, 1.0);
  const VaeParams p = micro_params(c, 21);
  Eigen::MatrixXd x(1, 2);
  x << 1.0, 0.0;
  const Eigen::MatrixXd eps = Eigen::MatrixXd::Zero(1, 1);
  const VaeLoss l = fyelbo_loss_with_noise(p, x, c, eps);
  // eps = 0 decodes the posterior mean, which is what reconstruct() evaluates.
  const Eigen::MatrixXd r = reconstruct(p, x, c);
  const double ce = -std::log(r(0, 0)) - std::log(1.0 - r(0, 1));
  EXPECT_NEAR(l.recon, ce, 1e-12);
}

TEST(FyelboLoss, RejectsBadInput) {
  const VaeConfig c = micro_config(1.0, 1.0);
  const VaeParams p = micro_params(c, 1);
  Eigen::MatrixXd bad(1, 2);
  bad << 1.5, 0.0;
  EXPECT_THROW(fyelbo_loss(p, bad, c, 0), std::invalid_argument);
  EXPECT_THROW(fyelbo_loss(p, Eigen::MatrixXd::Zero(1, 3), c, 0), std::invalid_argument);
}

TEST(LatentNoise, RespectsPosteriorSupport) {
  for (double rho : {1.5, 2.0}) {
    VaeConfig c;
    c.rho_posterior = rho;
    const double r = standard_member(EntropicIndex(rho)).radius;
    const Eigen::MatrixXd eps = draw_latent_noise(2000, c, 77);
    EXPECT_LE(eps.cwiseAbs().maxCoeff(), r);
  }
}

TEST(Reconstruct, ProbabilitiesAndL1) {
  const VaeConfig c;
  const VaeParams p = VaeParams::initialize(c, 8);
  const Eigen::MatrixXd data = make_synthetic_digits(20, 8).images;
  const Eigen::MatrixXd r = reconstruct(p, data, c);
  EXPECT_GE(r.minCoeff(), 0.0);
  EXPECT_LE(r.maxCoeff(), 1.0);
  EXPECT_NEAR(reconstruction_l1(p, data, c), (r - data).cwiseAbs().sum() / 20.0, 1e-12);
}

TEST(Train, DeterministicAndImproving) {
  VaeConfig c;
  c.epochs = 15;
  c.rho_posterior = 1.5;
  c.rho_obs = 2.0;
  const Eigen::MatrixXd data = make_synthetic_digits(128, 3).images;
  const TrainResult a = train(c, data);
  const TrainResult b = train(c, data);
  ASSERT_EQ(a.trace.size(), 15u);
  EXPECT_EQ(a.trace.back().mean_loss, b.trace.back().mean_loss);
  EXPECT_EQ(a.recon_l1, b.recon_l1);
  EXPECT_LT(a.trace.back().mean_loss, a.trace.front().mean_loss);
  EXPECT_EQ(a.recon_l1, a.trace.back().recon_l1);
}

TEST(Train, RejectsOutOfRangeData) {
  VaeConfig c;
  c.epochs = 1;
  Eigen::MatrixXd data = Eigen::MatrixXd::Zero(4, 64);
  data(0, 0) = -0.1;
  EXPECT_THROW(train(c, data), std::invalid_argument);
  EXPECT_THROW(train(c, Eigen::MatrixXd::Zero(4, 10)), std::invalid_argument);
}

TEST(Train, DivergenceCarriesTrace) {
  VaeConfig c;
  c.epochs = 50;
  c.learning_rate = 50.0;
  const Eigen::MatrixXd data = make_synthetic_digits(64, 1).images;
  EXPECT_THROW(train(c, data), TrainingDiverged);
}

TEST(SyntheticDigits, ShapeBorderAndFlipRate) {
  const SyntheticDigits s = make_synthetic_digits(512, 12);
  ASSERT_EQ(s.images.rows(), 512);
  ASSERT_EQ(s.images.cols(), 64);
  EXPECT_TRUE((s.images.array() == 0.0 || s.images.array() == 1.0).all());
  double flips = 0.0;
  for (Eigen::Index i = 0; i < 512; ++i) {
    const auto& mask = glyph_masks()[static_cast<std::size_t>(s.labels[static_cast<std::size_t>(i)])];
    for (int r = 0; r < 8; ++r) {
      for (int col = 0; col < 8; ++col) {
        const double v = s.images(i, 8 * r + col);
        if (r == 0 || r == 7 || col == 0 || col == 7) {
          EXPECT_EQ(v, 0.0);
        } else if (v != mask[static_cast<std::size_t>(8 * r + col)]) {
          flips += 1.0;
        }
      }
    }
  }
  const double n = 512.0 * 36.0;
  EXPECT_LT(std::abs(flips / n - 0.05), 3.0 * std::sqrt(0.05 * 0.95 / n));
  EXPECT_EQ(make_synthetic_digits(8, 12).images, make_synthetic_digits(8, 12).images);
  EXPECT_THROW(make_synthetic_digits(0, 1), std::invalid_argument);
}

}  // namespace
}  // namespace fyvi
