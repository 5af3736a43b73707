#ifndef FYVI_FYVAE_TOY_HPP
#define FYVI_FYVAE_TOY_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fyvi/errors.hpp"

namespace fyvi {

/// Architecture and optimization settings of the toy FY beta-VAE.
struct VaeConfig {
  std::size_t input_dim = 64;
  std::size_t hidden1 = 32;
  std::size_t hidden2 = 16;
  std::size_t latent_dim = 4;
  double rho_posterior = 1.0;  ///< 1, 1.5 or 2 (any value in {1} U (1, 2] works)
  double rho_obs = 1.0;        ///< 1 (Bernoulli) or 2 (binary sparsemax)
  double beta = 0.01;
  double learning_rate = 0.02;
  std::size_t batch_size = 32;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on zero counts, non-positive beta or rate,
  /// or unsupported indices.
  void validate() const;
};

/// Encoder x -> h1 -> h2 -> (mu, log sigma) and decoder z -> h2 -> h1 ->
/// per-pixel scores, rectifiers at every hidden layer. Biases are column
/// vectors stored as one-column matrices.
struct VaeParams {
  Eigen::MatrixXd enc_w1, enc_b1, enc_w2, enc_b2;
  Eigen::MatrixXd mu_w, mu_b, log_sigma_w, log_sigma_b;
  Eigen::MatrixXd dec_w1, dec_b1, dec_w2, dec_b2, dec_w3, dec_b3;

  /// All-zero tensors with the configured shapes.
  static VaeParams zeros(const VaeConfig& config);
  /// Weights uniform in +/- 1/sqrt(fan_in), zero biases (log sigma starts at 0).
  static VaeParams initialize(const VaeConfig& config, std::uint64_t seed);

  template <typename F>
  void visit(F&& f) {
    f("enc_w1", enc_w1); f("enc_b1", enc_b1); f("enc_w2", enc_w2); f("enc_b2", enc_b2);
    f("mu_w", mu_w); f("mu_b", mu_b); f("log_sigma_w", log_sigma_w); f("log_sigma_b", log_sigma_b);
    f("dec_w1", dec_w1); f("dec_b1", dec_b1); f("dec_w2", dec_w2); f("dec_b2", dec_b2);
    f("dec_w3", dec_w3); f("dec_b3", dec_b3);
  }
  template <typename F>
  void visit(F&& f) const {
    const_cast<VaeParams*>(this)->visit([&](const char* name, Eigen::MatrixXd& m) { f(name, std::as_const(m)); });
  }
};

/// Objective value on a batch, its parts, and the parameter gradient.
struct VaeLoss {
  double loss = 0.0;            ///< recon + beta * regularizer, batch mean
  double recon = 0.0;           ///< mean per-image FY reconstruction loss
  double regularizer = 0.0;     ///< mean per-image FY regularizer (before beta)
  double gaussian_kl = 0.0;     ///< mean KL(N(mu, sigma^2) || N(0, I)) of the same posteriors
  VaeParams grads;
};

/// Single-sample reparametrized FY-ELBO loss and its exact gradient.
/// `batch` is B x input_dim with entries in [0, 1]; eps is drawn from the
/// standard (2 - rho)-Gaussian member with generator `seed`.
VaeLoss fyelbo_loss(const VaeParams& params, const Eigen::MatrixXd& batch, const VaeConfig& config,
                    std::uint64_t seed);

/// Same with caller-supplied noise (B x latent_dim standard-member draws).
VaeLoss fyelbo_loss_with_noise(const VaeParams& params, const Eigen::MatrixXd& batch, const VaeConfig& config,
                               const Eigen::MatrixXd& eps);

/// Standard-member draws for a batch, row-major order, from `seed`.
Eigen::MatrixXd draw_latent_noise(std::size_t rows, const VaeConfig& config, std::uint64_t seed);

/// Decoded mean reconstruction (z = mu): prediction-map mass on pixel value 1.
Eigen::MatrixXd reconstruct(const VaeParams& params, const Eigen::MatrixXd& data, const VaeConfig& config);

/// Mean over images of the l1 distance between input and reconstruction.
double reconstruction_l1(const VaeParams& params, const Eigen::MatrixXd& data, const VaeConfig& config);

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double recon_l1 = 0.0;
  double mean_regularizer = 0.0;
  double mean_gaussian_kl = 0.0;
};

struct TrainResult {
  VaeParams params;
  std::vector<EpochStats> trace;
  double recon_l1 = 0.0;
};

inline constexpr double kDivergenceThreshold = 1e6;

/// Divergence abort; carries the completed epochs.
class TrainingDiverged : public NumericFailure {
 public:
  TrainingDiverged(const std::string& what, double loss, std::vector<EpochStats> trace)
      : NumericFailure(what, loss), trace_(std::move(trace)) {}
  const std::vector<EpochStats>& trace() const noexcept { return trace_; }

 private:
  std::vector<EpochStats> trace_;
};

/// Plain minibatch SGD over shuffled data. Throws TrainingDiverged when a
/// batch loss exceeds kDivergenceThreshold or stops being finite.
TrainResult train(const VaeConfig& config, const Eigen::MatrixXd& data);

/// n noisy 8x8 binary glyphs: four fixed masks drawn inside the 6x6
/// interior, interior pixels flipped with probability `flip_rate`; the
/// border is always zero.
struct SyntheticDigits {
  Eigen::MatrixXd images;  ///< n x 64, entries in {0, 1}
  std::vector<int> labels;
};
inline constexpr double kDefaultFlipRate = 0.05;
SyntheticDigits make_synthetic_digits(std::size_t n, std::uint64_t seed, double flip_rate = kDefaultFlipRate);

/// The clean glyph masks (row-major 8x8).
const std::vector<std::array<int, 64>>& glyph_masks();

}  // namespace fyvi

#endif  // FYVI_FYVAE_TOY_HPP
