#include <cstdint>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "commands.hpp"
#include "fyvi/errors.hpp"
#include "run_config.hpp"

namespace {

using namespace fyvi::cli;

struct Common {
  std::uint64_t seed = 0;
  std::string config;
  std::string out = "fyvi_out";
};

void add_common(CLI::App* sub, Common& c, bool out_optional) {
  sub->add_option("--seed", c.seed, "Master seed");
  sub->add_option("--config", c.config, "key=value file; flags take precedence");
  sub->add_option("--out", c.out, out_optional ? "Output directory (files written only if given)" : "Output directory");
}

void add_bench(CLI::App* sub, BenchArgs& b) {
  sub->add_option("--seeds", b.seeds, "Number of seeds, starting at --seed");
  sub->add_option("--max-iter", b.max_iter, "EM iterations cap");
  sub->add_option("--tol", b.tol, "Stop when |delta free energy| < tol");
  sub->add_option("--threads", b.threads, "Worker threads for independent runs");
  sub->add_option("--scale-convention", b.scale_convention, "Component scales as 'stddev' or 'variance'");
  sub->add_flag("--score-outliers", b.score_outliers, "Score outliers as a fifth true cluster");
}

// Config entries fill only options the command line left unset.
void apply_config(CLI::App* sub, const ConfigEntries& entries) {
  for (const auto& [key, value] : entries) {
    if (key == "config" || key == "help") throw UsageError("config key '" + key + "' is not allowed");
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw UsageError("unknown config key '" + key + "' for " + sub->get_name());
    }
    if (opt->count() > 0) continue;
    std::istringstream items(value);
    std::string item;
    if (opt->get_items_expected_max() > 1) {
      while (items >> item) opt->add_result(item);
    } else {
      opt->add_result(value);
    }
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fenchel-Young variational inference toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  Common common;
  EntmaxArgs entmax;
  GmmArgs gmm;
  SweepArgs sweep;
  VaeArgs vae;
  BetaGaussArgs betagauss;

  auto* s_entmax = app.add_subcommand("entmax", "Prediction map, FY loss and gradient checks");
  add_common(s_entmax, common, true);
  s_entmax->add_option("--rho", entmax.rho, "Entropic index (> 0) or 'hard'");
  s_entmax->add_option("--scores", entmax.scores, "Comma-separated scores");
  s_entmax->add_option("--random", entmax.random, "n k: random score vectors")->expected(2);
  s_entmax->add_option("--q", entmax.q, "Target distribution for the FY loss");
  s_entmax->add_flag("--check-gradients", entmax.check_gradients, "Finite-difference check of the loss gradient");

  auto* s_gmm = app.add_subcommand("gmm", "Standard, hard or sparse EM on the clustering benchmark");
  add_common(s_gmm, common, false);
  s_gmm->add_option("--method", gmm.method, "std | hard | sparse");
  s_gmm->add_option("--rho", gmm.rho, "Entropic index for sparse EM");
  add_bench(s_gmm, gmm.bench);

  auto* s_sweep = app.add_subcommand("sweep", "Entropic-index sweep on the clustering benchmark");
  add_common(s_sweep, common, false);
  s_sweep->add_option("--rhos", sweep.rhos, "Comma-separated entropic indices");
  add_bench(s_sweep, sweep.bench);

  auto* s_vae = app.add_subcommand("vae", "Train the toy FY beta-VAE");
  add_common(s_vae, common, false);
  s_vae->add_option("--rho", vae.rho, "Posterior index: 1 or in (1, 2]");
  s_vae->add_option("--rho-obs", vae.rho_obs, "Observation index (1 Bernoulli, 2 sparse)");
  s_vae->add_option("--beta", vae.beta, "Regularizer weight");
  s_vae->add_option("--lr", vae.learning_rate, "SGD learning rate");
  s_vae->add_option("--batch-size", vae.batch_size, "Minibatch size");
  s_vae->add_option("--epochs", vae.epochs, "Training epochs");
  s_vae->add_option("--latent", vae.latent, "Latent dimension");
  s_vae->add_option("--n-train", vae.n_train, "Synthetic training images");
  s_vae->add_option("--flip-rate", vae.flip_rate, "Synthetic pixel flip rate");
  s_vae->add_option("--data", vae.data, "'synthetic' or IDX images and labels paths")->expected(1, 2);
  s_vae->add_option("--limit", vae.limit, "Use at most this many IDX images");

  auto* s_bg = app.add_subcommand("betagauss", "(2-rho)-Gaussian density and CDF table");
  add_common(s_bg, common, false);
  s_bg->add_option("--rho", betagauss.rho, "Entropic index: 1 or in (1, 2]");
  s_bg->add_option("--stride", betagauss.stride, "Write every stride-th knot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    RunConfig run;
    run.command = sub->get_name();
    run.argv.assign(argv, argv + argc);
    if (!common.config.empty()) {
      run.config_path = common.config;
      run.config = read_config_file(run.config_path);
      apply_config(sub, run.config);
    }
    run.seed = common.seed;
    run.out_dir = common.out;

    const bool entmax_files = sub == s_entmax && sub->get_option("--out")->count() > 0;
    const bool writes = sub != s_entmax || entmax_files;
    if (writes) {
      ensure_out_dir(run.out_dir);
      write_manifest(run, sub->config_to_str(true, false));
    }

    if (sub == s_entmax) {
      cmd_entmax(entmax, run, entmax_files, std::cout);
    } else if (sub == s_gmm) {
      cmd_gmm(gmm, run, std::cout);
    } else if (sub == s_sweep) {
      cmd_sweep(sweep, run, std::cout);
    } else if (sub == s_vae) {
      cmd_vae(vae, run, std::cout);
    } else {
      cmd_betagauss(betagauss, run, std::cout);
    }
    return kExitOk;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fyvi::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fyvi::DomainError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const RunFailure& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const fyvi::NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const fyvi::CovarianceError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
