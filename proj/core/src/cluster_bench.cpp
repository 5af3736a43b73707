#include "fyvi/cluster_bench.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <stdexcept>

#include "fyvi/cluster_metrics.hpp"
#include "fyvi/rng.hpp"
#include "fyvi/svg_plot.hpp"

namespace fyvi {

Dataset generate(const BenchmarkSpec& spec) {
  if (spec.means.size() != spec.scales.size()) throw std::invalid_argument("one scale per component mean");
  for (double s : spec.scales) {
    if (!(s > 0.0)) throw std::invalid_argument("covariance scales must be positive");
  }
  const std::size_t n = spec.n_per_component * spec.means.size() + spec.n_outliers;
  Dataset data;
  data.x.resize(static_cast<Eigen::Index>(n), 2);
  data.labels.resize(n);
  Rng rng(spec.seed);
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < spec.means.size(); ++c) {
    const double sd =
        spec.scale_convention == ScaleConvention::kStdDev ? spec.scales[c] : std::sqrt(spec.scales[c]);
    for (std::size_t i = 0; i < spec.n_per_component; ++i, ++row) {
      data.x(row, 0) = spec.means[c][0] + sd * rng.normal();
      data.x(row, 1) = spec.means[c][1] + sd * rng.normal();
      data.labels[static_cast<std::size_t>(row)] = static_cast<int>(c);
    }
  }
  for (std::size_t i = 0; i < spec.n_outliers; ++i, ++row) {
    data.x(row, 0) = rng.uniform(spec.outlier_low, spec.outlier_high);
    data.x(row, 1) = rng.uniform(spec.outlier_low, spec.outlier_high);
    data.labels[static_cast<std::size_t>(row)] = -1;
  }
  return data;
}

MethodSpec MethodSpec::standard() { return {"std", Regularizer::tsallis(1.0), 1.0}; }
MethodSpec MethodSpec::hard() { return {"hard", Regularizer::zero(), 0.0}; }
MethodSpec MethodSpec::sparse(double rho) { return {"sparse", Regularizer::tsallis(rho), rho}; }
MethodSpec MethodSpec::tsallis(double rho) { return {"rho", Regularizer::tsallis(rho), rho}; }

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

std::uint64_t data_seed(std::uint64_t seed) { return derive_seed(seed, 0); }
std::uint64_t init_seed(std::uint64_t seed) { return derive_seed(seed, 1); }

RunRecord run_once(const MethodSpec& method, const BenchConfig& config, std::uint64_t seed, FitResult* fit_out) {
  BenchmarkSpec spec = config.data;
  spec.seed = data_seed(seed);
  const Dataset data = generate(spec);
  InitSpec init;
  init.seed = init_seed(seed);
  FitResult result = fit(data, config.components, method.omega, init, config.max_iter, config.tol);

  RunRecord r;
  r.method = method.name;
  r.rho = method.rho;
  r.seed = seed;
  const std::vector<int> all_pred = hard_labels(result.resp);
  std::vector<int> pred;
  std::vector<int> truth;
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < all_pred.size(); ++i) {
    if (config.score_outliers || data.labels[i] >= 0) {
      pred.push_back(all_pred[i]);
      truth.push_back(data.labels[i]);
      rows.push_back(static_cast<Eigen::Index>(i));
    }
  }
  const Eigen::MatrixXd scored = data.x(rows, Eigen::all);
  r.degenerate = degenerate_partition(pred, truth);
  r.ami = adjusted_mutual_information(pred, truth);
  r.ari = adjusted_rand_index(pred, truth);
  r.silhouette = r.degenerate ? 0.0 : silhouette_score(scored, pred);
  r.sparsity = e_step_sparsity(result.resp, method.omega);
  r.final_fyvfe = result.trace.back();
  r.iterations = result.iterations;
  r.trace = result.trace;
  if (fit_out) *fit_out = std::move(result);
  return r;
}

MethodReport make_report(const MethodSpec& method, std::vector<RunRecord> runs) {
  MethodReport report{method, std::move(runs), {}, {}, {}, {}};
  std::vector<double> ami, ari, sil, spars;
  for (const RunRecord& r : report.runs) {
    ami.push_back(r.ami);
    ari.push_back(r.ari);
    sil.push_back(r.silhouette);
    spars.push_back(r.sparsity);
  }
  report.ami = summarize(ami);
  report.ari = summarize(ari);
  report.silhouette = summarize(sil);
  report.sparsity = summarize(spars);
  return report;
}

MethodReport run_method(const MethodSpec& method, const BenchConfig& config) {
  if (config.seeds.empty()) throw std::invalid_argument("need at least one seed");
  std::vector<RunRecord> runs(config.seeds.size());
  const unsigned threads = std::max(1u, config.threads);
  for (std::size_t start = 0; start < config.seeds.size(); start += threads) {
    std::vector<std::future<RunRecord>> pending;
    const std::size_t stop = std::min(config.seeds.size(), start + threads);
    for (std::size_t i = start; i < stop; ++i) {
      pending.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                   [&, i] { return run_once(method, config, config.seeds[i]); }));
    }
    for (std::size_t i = start; i < stop; ++i) runs[i] = pending[i - start].get();
  }
  return make_report(method, std::move(runs));
}

std::vector<MethodReport> run_method_comparison(const BenchConfig& config) {
  return {run_method(MethodSpec::standard(), config), run_method(MethodSpec::hard(), config),
          run_method(MethodSpec::sparse(2.0), config)};
}

std::vector<MethodReport> run_rho_sweep(const BenchConfig& config, std::span<const double> rhos) {
  std::vector<MethodReport> out;
  for (double rho : rhos) out.push_back(run_method(MethodSpec::tsallis(rho), config));
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void write_runs_csv(std::ostream& out, std::span<const MethodReport> reports) {
  out << "method,rho,seed,ami,ari,silhouette,sparsity,final_fyvfe,iters\n";
  for (const MethodReport& m : reports) {
    for (const RunRecord& r : m.runs) {
      out << r.method << ',' << fmt(r.rho) << ',' << r.seed << ',' << fmt(r.ami) << ',' << fmt(r.ari) << ','
          << fmt(r.silhouette) << ',' << fmt(r.sparsity) << ',' << fmt(r.final_fyvfe) << ',' << r.iterations
          << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, std::span<const MethodReport> reports) {
  out << "method,rho,seeds,ami_mean,ami_std,ari_mean,ari_std,silhouette_mean,silhouette_std,sparsity_mean,"
         "sparsity_std\n";
  for (const MethodReport& m : reports) {
    out << m.method.name << ',' << fmt(m.method.rho) << ',' << m.runs.size() << ',' << fmt(m.ami.mean) << ','
        << fmt(m.ami.std) << ',' << fmt(m.ari.mean) << ',' << fmt(m.ari.std) << ',' << fmt(m.silhouette.mean) << ','
        << fmt(m.silhouette.std) << ',' << fmt(m.sparsity.mean) << ',' << fmt(m.sparsity.std) << '\n';
  }
}

void write_sweep_plots(const std::string& dir, std::span<const MethodReport> reports) {
  struct Panel {
    const char* key;
    const char* label;
    Summary MethodReport::*field;
  };
  const Panel panels[] = {{"ami", "adjusted mutual information", &MethodReport::ami},
                          {"ari", "adjusted Rand index", &MethodReport::ari},
                          {"silhouette", "silhouette score", &MethodReport::silhouette},
                          {"sparsity", "E-step sparsity", &MethodReport::sparsity}};
  std::filesystem::create_directories(dir);
  for (const Panel& p : panels) {
    svg::BandSeries s{p.key, {}, {}, {}};
    for (const MethodReport& m : reports) {
      s.x.push_back(m.method.rho);
      s.mean.push_back((m.*p.field).mean);
      s.std.push_back((m.*p.field).std);
    }
    std::ofstream f(std::filesystem::path(dir) / (std::string("sweep_") + p.key + ".svg"));
    f << svg::line_plot(p.label, "rho", p.label, {s});
  }
}

}  // namespace fyvi
