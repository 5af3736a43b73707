#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <span>
#include <sstream>

#include "fyvi/beta_gaussian.hpp"
#include "fyvi/checkpoint.hpp"
#include "fyvi/cluster_bench.hpp"
#include "fyvi/errors.hpp"
#include "fyvi/fyem_gmm.hpp"
#include "fyvi/fyvae_toy.hpp"
#include "fyvi/idx_io.hpp"
#include "fyvi/quadrature.hpp"
#include "fyvi/rng.hpp"
#include "fyvi/simplex_maps.hpp"
#include "fyvi/svg_plot.hpp"

namespace fyvi::cli {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

Regularizer parse_regularizer(const std::string& text) {
  if (text == "hard") return Regularizer::zero();
  double rho = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), rho);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !(rho > 0.0) || !std::isfinite(rho)) {
    throw UsageError("--rho must be a positive number or 'hard', got '" + text + "'");
  }
  return Regularizer::tsallis(rho);
}

std::string join(std::span<const double> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

// Norm-relative error of the analytic score gradient of the FY loss against
// central differences.
double gradient_error(std::span<const double> eta, const Distribution& q, const Regularizer& omega) {
  constexpr double h = 1e-6;
  const std::vector<double> g = fy_loss_score_gradient(eta, q, omega);
  std::vector<double> e(eta.begin(), eta.end());
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double keep = e[k];
    e[k] = keep + h;
    const double up = fy_loss(e, q, omega);
    e[k] = keep - h;
    const double down = fy_loss(e, q, omega);
    e[k] = keep;
    diff = std::max(diff, std::abs((up - down) / (2.0 * h) - g[k]));
    scale = std::max(scale, std::abs(g[k]));
  }
  return diff / std::max(scale, 1e-8);
}

BenchConfig bench_config(const BenchArgs& a, std::uint64_t seed) {
  if (a.seeds == 0) throw UsageError("--seeds must be at least 1");
  if (a.max_iter == 0) throw UsageError("--max-iter must be at least 1");
  BenchConfig c;
  c.seeds.clear();
  for (std::size_t i = 0; i < a.seeds; ++i) c.seeds.push_back(seed + i);
  c.max_iter = a.max_iter;
  c.tol = a.tol;
  c.threads = std::max(1u, a.threads);
  c.score_outliers = a.score_outliers;
  if (a.scale_convention == "stddev") {
    c.data.scale_convention = ScaleConvention::kStdDev;
  } else if (a.scale_convention == "variance") {
    c.data.scale_convention = ScaleConvention::kVariance;
  } else {
    throw UsageError("--scale-convention must be 'stddev' or 'variance'");
  }
  return c;
}

void print_report(const MethodReport& m, std::ostream& out) {
  out << m.method.name << " rho=" << fmt(m.method.rho) << "  ami " << fmt(m.ami.mean) << " +/- " << fmt(m.ami.std)
      << "  ari " << fmt(m.ari.mean) << " +/- " << fmt(m.ari.std) << "  silhouette " << fmt(m.silhouette.mean)
      << " +/- " << fmt(m.silhouette.std) << "  sparsity " << fmt(m.sparsity.mean) << '\n';
}

void write_trace_csv(const std::filesystem::path& path, std::span<const MethodReport> reports) {
  auto f = open_out(path);
  f << "method,rho,seed,iter,fyvfe\n";
  for (const auto& m : reports) {
    for (const auto& r : m.runs) {
      for (std::size_t i = 0; i < r.trace.size(); ++i) {
        f << r.method << ',' << fmt(r.rho) << ',' << r.seed << ',' << i + 1 << ',' << fmt(r.trace[i]) << '\n';
      }
    }
  }
}

[[noreturn]] void rethrow_numeric(const std::string& module, const std::string& method, std::uint64_t seed,
                                  const std::exception& e) {
  throw RunFailure(module + ": method " + method + ", seed " + std::to_string(seed) + ": " + e.what());
}

void write_vae_trace(const std::filesystem::path& path, const std::vector<EpochStats>& trace) {
  auto f = open_out(path);
  f << "epoch,mean_loss,recon_l1,mean_regularizer,mean_gaussian_kl\n";
  for (const auto& s : trace) {
    f << s.epoch << ',' << fmt(s.mean_loss) << ',' << fmt(s.recon_l1) << ',' << fmt(s.mean_regularizer) << ','
      << fmt(s.mean_gaussian_kl) << '\n';
  }
}

}  // namespace

void cmd_entmax(const EntmaxArgs& args, const RunConfig& run, bool write_files, std::ostream& out) {
  const Regularizer omega = parse_regularizer(args.rho);
  const bool have_scores = !args.scores.empty();
  const bool have_random = !args.random.empty();
  if (have_scores == have_random) throw UsageError("give exactly one of --scores or --random");

  if (have_scores) {
    const std::vector<double> eta = parse_double_list(args.scores);
    const Distribution q = prediction_map(eta, omega);
    out << "q: " << join(q.probs()) << '\n';
    out << "support: {";
    for (std::size_t i = 0; i < q.support().size(); ++i) out << (i ? "," : "") << q.support()[i] + 1;
    out << "} size " << q.support().size() << '\n';
    std::optional<Distribution> target;
    if (!args.q.empty()) {
      std::vector<double> t = parse_double_list(args.q);
      if (t.size() != eta.size()) throw UsageError("--q must have as many entries as --scores");
      try {
        target.emplace(std::move(t));
      } catch (const DomainError& e) {
        throw UsageError(std::string("--q: ") + e.what());
      }
      out << "fy_loss: " << fmt(fy_loss(eta, *target, omega)) << '\n';
    }
    if (args.check_gradients) {
      const Distribution ref = target ? *target : Distribution::uniform(eta.size());
      out << "max_rel_grad_error: " << fmt(gradient_error(eta, ref, omega)) << '\n';
    }
    if (write_files) {
      auto f = open_out(run.out_dir / "entmax.csv");
      f << "index,score,prob\n";
      for (std::size_t k = 0; k < eta.size(); ++k) f << k + 1 << ',' << fmt(eta[k]) << ',' << fmt(q[k]) << '\n';
    }
    return;
  }

  if (args.random.size() != 2 || args.random[0] == 0 || args.random[1] == 0) {
    throw UsageError("--random takes two positive counts: n k");
  }
  const std::size_t n = args.random[0];
  const std::size_t k = args.random[1];
  Rng rng(run.seed);
  std::vector<double> eta(k);
  std::vector<double> t(k);
  double support_total = 0.0;
  double worst = 0.0;
  std::ofstream f;
  if (write_files) {
    f = open_out(run.out_dir / "entmax_random.csv");
    f << "instance,support_size,fy_loss,rel_grad_error\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : eta) v = 2.0 * rng.normal();
    double sum = 0.0;
    for (auto& v : t) sum += (v = rng.uniform());
    for (auto& v : t) v /= sum;
    const Distribution target(t);
    const Distribution q = prediction_map(eta, omega);
    support_total += static_cast<double>(q.support().size());
    const double err = args.check_gradients ? gradient_error(eta, target, omega) : 0.0;
    worst = std::max(worst, err);
    if (write_files) {
      f << i + 1 << ',' << q.support().size() << ',' << fmt(fy_loss(eta, target, omega)) << ','
        << (args.check_gradients ? fmt(err) : std::string()) << '\n';
    }
  }
  out << "instances: " << n << "  k: " << k << '\n';
  out << "mean_support: " << fmt(support_total / static_cast<double>(n)) << '\n';
  if (args.check_gradients) out << "max_rel_grad_error: " << fmt(worst) << '\n';
}

void cmd_gmm(const GmmArgs& args, const RunConfig& run, std::ostream& out) {
  MethodSpec method = MethodSpec::standard();
  if (args.method == "std") {
    method = MethodSpec::standard();
  } else if (args.method == "hard") {
    method = MethodSpec::hard();
  } else if (args.method == "sparse") {
    if (!(args.rho > 1.0)) throw UsageError("sparse EM needs --rho > 1");
    method = MethodSpec::sparse(args.rho);
  } else {
    throw UsageError("--method must be std, hard or sparse");
  }
  const BenchConfig config = bench_config(args.bench, run.seed);

  std::vector<RunRecord> runs(config.seeds.size());
  std::vector<FitResult> fits(config.seeds.size());
  const unsigned threads = config.threads;
  for (std::size_t start = 0; start < runs.size(); start += threads) {
    const std::size_t stop = std::min(runs.size(), start + threads);
    std::vector<std::future<void>> pending;
    for (std::size_t i = start; i < stop; ++i) {
      pending.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                   [&, i] { runs[i] = run_once(method, config, config.seeds[i], &fits[i]); }));
    }
    for (std::size_t i = start; i < stop; ++i) {
      try {
        pending[i - start].get();
      } catch (const NumericFailure& e) {
        rethrow_numeric("fyem_gmm", method.name, config.seeds[i], e);
      } catch (const CovarianceError& e) {
        rethrow_numeric("fyem_gmm", method.name, config.seeds[i], e);
      }
    }
  }
  const std::vector<MethodReport> reports{make_report(method, std::move(runs))};

  {
    auto f = open_out(run.out_dir / "metrics.csv");
    write_runs_csv(f, reports);
  }
  {
    auto f = open_out(run.out_dir / "summary.csv");
    write_summary_csv(f, reports);
  }
  write_trace_csv(run.out_dir / "fyvfe_trace.csv", reports);
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const std::string stem = method.name + "_seed" + std::to_string(config.seeds[i]);
    save_gmm_checkpoint(run.out_dir / ("checkpoint_" + stem + ".json"), fits[i].state);
    BenchmarkSpec spec = config.data;
    spec.seed = data_seed(config.seeds[i]);
    auto f = open_out(run.out_dir / ("clustering_" + stem + ".svg"));
    f << svg::clustering_plot(method.name + " EM, seed " + std::to_string(config.seeds[i]), generate(spec),
                              fits[i].state);
  }
  print_report(reports.front(), out);
}

void cmd_sweep(const SweepArgs& args, const RunConfig& run, std::ostream& out) {
  const std::vector<double> rhos = parse_double_list(args.rhos);
  for (double r : rhos) {
    if (!(r > 0.0)) throw UsageError("--rhos entries must be positive");
  }
  const BenchConfig config = bench_config(args.bench, run.seed);
  std::vector<MethodReport> reports;
  for (double rho : rhos) {
    const MethodSpec method = MethodSpec::tsallis(rho);
    try {
      reports.push_back(run_method(method, config));
    } catch (const NumericFailure& e) {
      throw RunFailure("cluster_bench: sweep rho " + fmt(rho) + ": " + e.what());
    } catch (const CovarianceError& e) {
      throw RunFailure("cluster_bench: sweep rho " + fmt(rho) + ": " + e.what());
    }
    print_report(reports.back(), out);
  }
  {
    auto f = open_out(run.out_dir / "sweep_runs.csv");
    write_runs_csv(f, reports);
  }
  {
    auto f = open_out(run.out_dir / "sweep_summary.csv");
    write_summary_csv(f, reports);
  }
  write_trace_csv(run.out_dir / "fyvfe_trace.csv", reports);
  write_sweep_plots(run.out_dir.string(), reports);
}

void cmd_vae(const VaeArgs& args, const RunConfig& run, std::ostream& out) {
  VaeConfig config;
  config.rho_posterior = args.rho;
  config.rho_obs = args.rho_obs;
  config.beta = args.beta;
  config.learning_rate = args.learning_rate;
  config.batch_size = args.batch_size;
  config.epochs = args.epochs;
  config.latent_dim = args.latent;
  config.seed = run.seed;

  Eigen::MatrixXd data;
  if (args.data.size() == 1 && args.data[0] == "synthetic") {
    if (args.n_train == 0) throw UsageError("--n-train must be at least 1");
    if (!(args.flip_rate >= 0.0 && args.flip_rate <= 1.0)) throw UsageError("--flip-rate must lie in [0, 1]");
    data = make_synthetic_digits(args.n_train, run.seed, args.flip_rate).images;
  } else if (args.data.size() == 2) {
    for (const auto& p : args.data) {
      if (!std::filesystem::is_regular_file(p)) throw UsageError("no such IDX file: " + p);
    }
    data = load_idx(args.data[0], args.data[1], args.limit).images;
    if (data.rows() == 0) throw UsageError("IDX input holds no images");
  } else {
    throw UsageError("--data takes 'synthetic' or two IDX paths (images labels)");
  }
  config.input_dim = static_cast<std::size_t>(data.cols());
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  TrainResult result;
  try {
    result = train(config, data);
  } catch (const TrainingDiverged& e) {
    write_vae_trace(run.out_dir / "trace.csv", e.trace());
    throw RunFailure(std::string("fyvae_toy: seed ") + std::to_string(run.seed) + ": " + e.what());
  } catch (const NumericFailure& e) {
    throw RunFailure(std::string("fyvae_toy: seed ") + std::to_string(run.seed) + ": " + e.what());
  }
  write_vae_trace(run.out_dir / "trace.csv", result.trace);
  save_vae_checkpoint(run.out_dir / "checkpoint.json", config, result.params);
  out << "images: " << data.rows() << "  pixels: " << data.cols() << '\n';
  out << "first_epoch_loss: " << fmt(result.trace.front().mean_loss) << '\n';
  out << "final_epoch_loss: " << fmt(result.trace.back().mean_loss) << '\n';
  out << "final_l1: " << fmt(result.recon_l1) << '\n';
}

void cmd_betagauss(const BetaGaussArgs& args, const RunConfig& run, std::ostream& out) {
  if (args.stride == 0) throw UsageError("--stride must be at least 1");
  if (!(args.rho > 0.0)) throw UsageError("--rho must be positive");
  const StandardMember* member = nullptr;
  try {
    member = &standard_member(EntropicIndex(args.rho));
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const double reach = std::isfinite(member->radius) ? member->radius : 12.0;
  const double mass =
      gauss_legendre(kQuadratureNodes).integrate([&](double u) { return standard_pdf(u, *member); }, -reach, reach);
  auto f = open_out(run.out_dir / "betagauss.csv");
  f << "u,pdf,cdf\n";
  for (std::size_t i = 0; i < member->knots.size(); i += args.stride) {
    const double u = member->knots[i];
    f << fmt(u) << ',' << fmt(standard_pdf(u, *member)) << ',' << fmt(member->cdf[i]) << '\n';
  }
  out << "rho: " << fmt(member->rho) << '\n';
  out << "log_normalizer: " << fmt(member->log_normalizer) << '\n';
  out << "radius: " << (std::isfinite(member->radius) ? fmt(member->radius) : std::string("inf")) << '\n';
  out << "variance: " << fmt(member->variance) << '\n';
  out << "mass: " << fmt(mass) << '\n';
}

}  // namespace fyvi::cli
