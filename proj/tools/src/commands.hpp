#ifndef FYVI_TOOLS_COMMANDS_HPP
#define FYVI_TOOLS_COMMANDS_HPP

#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace fyvi::cli {

struct EntmaxArgs {
  std::string rho = "1";  ///< a positive number or "hard"
  std::string scores;
  std::vector<std::size_t> random;  ///< {n, k}
  std::string q;                    ///< optional target distribution
  bool check_gradients = false;
};

struct BenchArgs {
  std::size_t seeds = 5;
  std::size_t max_iter = 200;
  double tol = 1e-8;
  unsigned threads = 1;
  std::string scale_convention = "stddev";
  bool score_outliers = false;
};

struct GmmArgs {
  std::string method = "sparse";
  double rho = 2.0;
  BenchArgs bench;
};

struct SweepArgs {
  std::string rhos = "0.1,0.5,0.9,1.0,1.1,1.5,2.0,3.0";
  BenchArgs bench;
};

struct VaeArgs {
  double rho = 1.0;
  double rho_obs = 1.0;
  double beta = 0.01;
  double learning_rate = 0.02;
  std::size_t batch_size = 32;
  std::size_t epochs = 200;
  std::size_t latent = 4;
  std::size_t n_train = 512;
  double flip_rate = 0.05;
  std::vector<std::string> data{"synthetic"};  ///< "synthetic" or {images.idx, labels.idx}
  std::size_t limit = std::numeric_limits<std::size_t>::max();
};

struct BetaGaussArgs {
  double rho = 1.5;
  std::size_t stride = 1;  ///< write every stride-th CDF knot
};

/// Each command prints a human-readable summary to `out`; files go to
/// run.out_dir when `write_files` is set.
void cmd_entmax(const EntmaxArgs& args, const RunConfig& run, bool write_files, std::ostream& out);
void cmd_gmm(const GmmArgs& args, const RunConfig& run, std::ostream& out);
void cmd_sweep(const SweepArgs& args, const RunConfig& run, std::ostream& out);
void cmd_vae(const VaeArgs& args, const RunConfig& run, std::ostream& out);
void cmd_betagauss(const BetaGaussArgs& args, const RunConfig& run, std::ostream& out);

}  // namespace fyvi::cli

#endif  // FYVI_TOOLS_COMMANDS_HPP
