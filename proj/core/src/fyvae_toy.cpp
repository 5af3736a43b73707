#include "fyvi/fyvae_toy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fyvi/beta_gaussian.hpp"
#include "fyvi/errors.hpp"
#include "fyvi/rng.hpp"
#include "fyvi/simplex_maps.hpp"

namespace fyvi {

namespace {

using Eigen::MatrixXd;

MatrixXd relu(const MatrixXd& a) { return a.cwiseMax(0.0); }

MatrixXd relu_mask(const MatrixXd& a) { return (a.array() > 0.0).cast<double>().matrix(); }

MatrixXd affine(const MatrixXd& w, const MatrixXd& b, const MatrixXd& in) {
  return (w * in).colwise() + b.col(0);
}

void uniform_fill(MatrixXd& m, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
  }
}

EntropicIndex obs_index(const VaeConfig& c) { return EntropicIndex(c.rho_obs); }

}  // namespace

void VaeConfig::validate() const {
  if (input_dim == 0 || hidden1 == 0 || hidden2 == 0 || latent_dim == 0 || batch_size == 0 || epochs == 0) {
    throw std::invalid_argument("VAE sizes and counts must be at least 1");
  }
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  const EntropicIndex post(rho_posterior);
  if (!post.is_unit() && !(rho_posterior > 1.0 && rho_posterior <= 2.0)) {
    throw std::invalid_argument("posterior index must be 1 or lie in (1, 2]");
  }
  if (!(rho_obs > 0.0)) throw std::invalid_argument("observation index must be positive");
}

VaeParams VaeParams::zeros(const VaeConfig& c) {
  const auto in = static_cast<Eigen::Index>(c.input_dim);
  const auto h1 = static_cast<Eigen::Index>(c.hidden1);
  const auto h2 = static_cast<Eigen::Index>(c.hidden2);
  const auto L = static_cast<Eigen::Index>(c.latent_dim);
  VaeParams p;
  p.enc_w1 = MatrixXd::Zero(h1, in);
  p.enc_b1 = MatrixXd::Zero(h1, 1);
  p.enc_w2 = MatrixXd::Zero(h2, h1);
  p.enc_b2 = MatrixXd::Zero(h2, 1);
  p.mu_w = MatrixXd::Zero(L, h2);
  p.mu_b = MatrixXd::Zero(L, 1);
  p.log_sigma_w = MatrixXd::Zero(L, h2);
  p.log_sigma_b = MatrixXd::Zero(L, 1);
  p.dec_w1 = MatrixXd::Zero(h2, L);
  p.dec_b1 = MatrixXd::Zero(h2, 1);
  p.dec_w2 = MatrixXd::Zero(h1, h2);
  p.dec_b2 = MatrixXd::Zero(h1, 1);
  p.dec_w3 = MatrixXd::Zero(in, h1);
  p.dec_b3 = MatrixXd::Zero(in, 1);
  return p;
}

VaeParams VaeParams::initialize(const VaeConfig& c, std::uint64_t seed) {
  c.validate();
  VaeParams p = zeros(c);
  Rng rng(seed);
  for (MatrixXd* w : {&p.enc_w1, &p.enc_w2, &p.mu_w, &p.log_sigma_w, &p.dec_w1, &p.dec_w2, &p.dec_w3}) {
    uniform_fill(*w, rng);
  }
  return p;
}

Eigen::MatrixXd draw_latent_noise(std::size_t rows, const VaeConfig& config, std::uint64_t seed) {
  const StandardMember& member = standard_member(EntropicIndex(config.rho_posterior));
  Rng rng(seed);
  MatrixXd eps(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(config.latent_dim));
  for (Eigen::Index i = 0; i < eps.rows(); ++i) {
    for (Eigen::Index d = 0; d < eps.cols(); ++d) eps(i, d) = sample_standard(member, rng);
  }
  return eps;
}

VaeLoss fyelbo_loss_with_noise(const VaeParams& p, const Eigen::MatrixXd& batch, const VaeConfig& config,
                               const Eigen::MatrixXd& eps) {
  const Eigen::Index B = batch.rows();
  if (batch.cols() != static_cast<Eigen::Index>(config.input_dim)) throw std::invalid_argument("batch width mismatch");
  if (eps.rows() != B || eps.cols() != static_cast<Eigen::Index>(config.latent_dim)) {
    throw std::invalid_argument("noise shape mismatch");
  }
  const double inv_b = 1.0 / static_cast<double>(B);
  const StandardMember& member = standard_member(EntropicIndex(config.rho_posterior));
  const EntropicIndex rho_obs = obs_index(config);

  // Forward; samples are columns.
  const MatrixXd x = batch.transpose();
  const MatrixXd a1 = affine(p.enc_w1, p.enc_b1, x);
  const MatrixXd h1 = relu(a1);
  const MatrixXd a2 = affine(p.enc_w2, p.enc_b2, h1);
  const MatrixXd h2 = relu(a2);
  const MatrixXd mu = affine(p.mu_w, p.mu_b, h2);
  const MatrixXd log_sigma = affine(p.log_sigma_w, p.log_sigma_b, h2);
  const MatrixXd sigma = log_sigma.array().exp().matrix();
  const MatrixXd noise = eps.transpose();
  const MatrixXd z = mu + sigma.cwiseProduct(noise);
  const MatrixXd d1 = affine(p.dec_w1, p.dec_b1, z);
  const MatrixXd g1 = relu(d1);
  const MatrixXd d2 = affine(p.dec_w2, p.dec_b2, g1);
  const MatrixXd g2 = relu(d2);
  const MatrixXd scores = affine(p.dec_w3, p.dec_b3, g2);

  VaeLoss out;
  out.grads = VaeParams::zeros(config);
  VaeParams& g = out.grads;

  MatrixXd d_scores(scores.rows(), scores.cols());
  double recon = 0.0;
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      const double xv = x(i, j);
      if (!(xv >= 0.0 && xv <= 1.0)) throw std::invalid_argument("batch entries must lie in [0, 1]");
      const BinaryFyLoss bl = binary_fy_loss(scores(i, j), xv, rho_obs);
      recon += bl.loss;
      d_scores(i, j) = bl.gradient * inv_b;
    }
  }

  MatrixXd d_mu_reg(mu.rows(), mu.cols());
  MatrixXd d_sigma_reg(mu.rows(), mu.cols());
  double reg = 0.0;
  double kl = 0.0;
  for (Eigen::Index j = 0; j < mu.cols(); ++j) {
    for (Eigen::Index d = 0; d < mu.rows(); ++d) {
      const ScalarRegularizer r = fy_regularizer_1d(mu(d, j), sigma(d, j), member);
      reg += r.value;
      d_mu_reg(d, j) = config.beta * r.d_mu * inv_b;
      d_sigma_reg(d, j) = config.beta * r.d_sigma * inv_b;
      kl += 0.5 * (mu(d, j) * mu(d, j) + sigma(d, j) * sigma(d, j) - 1.0) - log_sigma(d, j);
    }
  }
  out.recon = recon * inv_b;
  out.regularizer = reg * inv_b;
  out.gaussian_kl = kl * inv_b;
  out.loss = out.recon + config.beta * out.regularizer;
  if (!std::isfinite(out.recon)) throw NumericFailure("reconstruction term is not finite", out.recon);
  if (!std::isfinite(out.regularizer)) throw NumericFailure("regularizer term is not finite", out.regularizer);

  // Reverse accumulation.
  g.dec_w3 = d_scores * g2.transpose();
  g.dec_b3 = d_scores.rowwise().sum();
  const MatrixXd d_d2 = (p.dec_w3.transpose() * d_scores).cwiseProduct(relu_mask(d2));
  g.dec_w2 = d_d2 * g1.transpose();
  g.dec_b2 = d_d2.rowwise().sum();
  const MatrixXd d_d1 = (p.dec_w2.transpose() * d_d2).cwiseProduct(relu_mask(d1));
  g.dec_w1 = d_d1 * z.transpose();
  g.dec_b1 = d_d1.rowwise().sum();
  const MatrixXd d_z = p.dec_w1.transpose() * d_d1;

  const MatrixXd d_mu = d_z + d_mu_reg;
  const MatrixXd d_sigma = d_z.cwiseProduct(noise) + d_sigma_reg;
  const MatrixXd d_log_sigma = d_sigma.cwiseProduct(sigma);
  g.mu_w = d_mu * h2.transpose();
  g.mu_b = d_mu.rowwise().sum();
  g.log_sigma_w = d_log_sigma * h2.transpose();
  g.log_sigma_b = d_log_sigma.rowwise().sum();
  const MatrixXd d_a2 =
      (p.mu_w.transpose() * d_mu + p.log_sigma_w.transpose() * d_log_sigma).cwiseProduct(relu_mask(a2));
  g.enc_w2 = d_a2 * h1.transpose();
  g.enc_b2 = d_a2.rowwise().sum();
  const MatrixXd d_a1 = (p.enc_w2.transpose() * d_a2).cwiseProduct(relu_mask(a1));
  g.enc_w1 = d_a1 * x.transpose();
  g.enc_b1 = d_a1.rowwise().sum();
  return out;
}

VaeLoss fyelbo_loss(const VaeParams& params, const Eigen::MatrixXd& batch, const VaeConfig& config,
                    std::uint64_t seed) {
  return fyelbo_loss_with_noise(params, batch, config,
                                draw_latent_noise(static_cast<std::size_t>(batch.rows()), config, seed));
}

Eigen::MatrixXd reconstruct(const VaeParams& p, const Eigen::MatrixXd& data, const VaeConfig& config) {
  const MatrixXd x = data.transpose();
  const MatrixXd h1 = relu(affine(p.enc_w1, p.enc_b1, x));
  const MatrixXd h2 = relu(affine(p.enc_w2, p.enc_b2, h1));
  const MatrixXd mu = affine(p.mu_w, p.mu_b, h2);
  const MatrixXd g1 = relu(affine(p.dec_w1, p.dec_b1, mu));
  const MatrixXd g2 = relu(affine(p.dec_w2, p.dec_b2, g1));
  const MatrixXd scores = affine(p.dec_w3, p.dec_b3, g2);
  const EntropicIndex rho_obs = obs_index(config);
  MatrixXd out(data.rows(), data.cols());
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    for (Eigen::Index i = 0; i < scores.rows(); ++i) out(j, i) = binary_fy_loss(scores(i, j), 0.0, rho_obs).prob;
  }
  return out;
}

double reconstruction_l1(const VaeParams& params, const Eigen::MatrixXd& data, const VaeConfig& config) {
  const MatrixXd rec = reconstruct(params, data, config);
  return (rec - data).cwiseAbs().sum() / static_cast<double>(data.rows());
}

TrainResult train(const VaeConfig& config, const Eigen::MatrixXd& data) {
  config.validate();
  if (data.rows() == 0 || data.cols() != static_cast<Eigen::Index>(config.input_dim)) {
    throw std::invalid_argument("training data must have input_dim columns and at least one row");
  }
  if ((data.array() < 0.0).any() || (data.array() > 1.0).any()) {
    throw std::invalid_argument("training data must lie in [0, 1]");
  }
  TrainResult result;
  result.params = VaeParams::initialize(config, derive_seed(config.seed, 0));
  Rng shuffle_rng(derive_seed(config.seed, 1));
  const auto n = static_cast<std::size_t>(data.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uint64_t step = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    double loss_sum = 0.0;
    double reg_sum = 0.0;
    double kl_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      MatrixXd batch(static_cast<Eigen::Index>(stop - start), data.cols());
      for (std::size_t r = start; r < stop; ++r) {
        batch.row(static_cast<Eigen::Index>(r - start)) = data.row(static_cast<Eigen::Index>(order[r]));
      }
      VaeLoss l;
      try {
        l = fyelbo_loss(result.params, batch, config, derive_seed(config.seed, 2 + step++));
      } catch (const NumericFailure& e) {
        throw TrainingDiverged(std::string("training diverged at epoch ") + std::to_string(epoch) + ": " + e.what(),
                               e.residual(), result.trace);
      }
      if (!(l.loss < kDivergenceThreshold)) {
        throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch), l.loss, result.trace);
      }
      const auto weight = static_cast<double>(stop - start);
      loss_sum += l.loss * weight;
      reg_sum += l.regularizer * weight;
      kl_sum += l.gaussian_kl * weight;
      // SGD step.
      auto update = [&](Eigen::MatrixXd& w, const Eigen::MatrixXd& gw) { w -= config.learning_rate * gw; };
      update(result.params.enc_w1, l.grads.enc_w1);
      update(result.params.enc_b1, l.grads.enc_b1);
      update(result.params.enc_w2, l.grads.enc_w2);
      update(result.params.enc_b2, l.grads.enc_b2);
      update(result.params.mu_w, l.grads.mu_w);
      update(result.params.mu_b, l.grads.mu_b);
      update(result.params.log_sigma_w, l.grads.log_sigma_w);
      update(result.params.log_sigma_b, l.grads.log_sigma_b);
      update(result.params.dec_w1, l.grads.dec_w1);
      update(result.params.dec_b1, l.grads.dec_b1);
      update(result.params.dec_w2, l.grads.dec_w2);
      update(result.params.dec_b2, l.grads.dec_b2);
      update(result.params.dec_w3, l.grads.dec_w3);
      update(result.params.dec_b3, l.grads.dec_b3);
    }
    EpochStats s;
    s.epoch = epoch;
    s.mean_loss = loss_sum / static_cast<double>(n);
    s.mean_regularizer = reg_sum / static_cast<double>(n);
    s.mean_gaussian_kl = kl_sum / static_cast<double>(n);
    s.recon_l1 = reconstruction_l1(result.params, data, config);
    result.trace.push_back(s);
  }
  result.recon_l1 = result.trace.back().recon_l1;
  return result;
}

const std::vector<std::array<int, 64>>& glyph_masks() {
  static const std::vector<std::array<int, 64>> masks = [] {
    const char* art[4][8] = {
        {"........", "..####..", ".#....#.", ".#....#.", ".#....#.", ".#....#.", "..####..", "........"},
        {"........", "...##...", "..###...", "...##...", "...##...", "...##...", "..####..", "........"},
        {"........", ".#....#.", "..#..#..", "...##...", "...##...", "..#..#..", ".#....#.", "........"},
        {"........", ".######.", "......#.", ".....#..", "....#...", "...#....", "...#....", "........"},
    };
    std::vector<std::array<int, 64>> out(4);
    for (int g = 0; g < 4; ++g) {
      for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) out[static_cast<std::size_t>(g)][static_cast<std::size_t>(8 * r + c)] = art[g][r][c] == '#';
      }
    }
    return out;
  }();
  return masks;
}

SyntheticDigits make_synthetic_digits(std::size_t n, std::uint64_t seed, double flip_rate) {
  if (n == 0) throw std::invalid_argument("need at least one image");
  const auto& masks = glyph_masks();
  Rng rng(seed);
  SyntheticDigits out;
  out.images.resize(static_cast<Eigen::Index>(n), 64);
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = static_cast<std::size_t>(rng.below(masks.size()));
    out.labels[i] = static_cast<int>(g);
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) {
        const int idx = 8 * r + c;
        int v = masks[g][static_cast<std::size_t>(idx)];
        const bool border = r == 0 || r == 7 || c == 0 || c == 7;
        if (!border && rng.uniform() < flip_rate) v = 1 - v;
        out.images(static_cast<Eigen::Index>(i), idx) = border ? 0.0 : static_cast<double>(v);
      }
    }
  }
  return out;
}

}  // namespace fyvi
