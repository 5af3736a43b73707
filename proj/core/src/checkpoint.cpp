#include "fyvi/checkpoint.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "fyvi/errors.hpp"

namespace fyvi {

namespace {

using nlohmann::json;

constexpr const char* kGmmFormat = "fyvi-gmm-checkpoint";
constexpr const char* kVaeFormat = "fyvi-vae-checkpoint";
constexpr int kVersion = 1;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw std::runtime_error("checkpoint matrix row count mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = data.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw std::runtime_error("checkpoint matrix column count mismatch");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path, const char* format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what(), e.byte);
  }
  if (j.value("format", std::string()) != format) throw FormatError(std::string("not a ") + format, 0);
  if (j.value("version", 0) != kVersion) throw FormatError("unsupported checkpoint version", 0);
  return j;
}

}  // namespace

void save_gmm_checkpoint(const std::filesystem::path& path, const GmmState& state) {
  json j;
  j["format"] = kGmmFormat;
  j["version"] = kVersion;
  j["components"] = state.components();
  j["dim"] = state.means.cols();
  if (state.omega.is_zero()) {
    j["regularizer"] = "zero";
  } else {
    j["regularizer"] = "tsallis";
    j["rho"] = state.omega.index().value();
  }
  j["eta"] = state.eta;
  j["means"] = matrix_to_json(state.means);
  json covs = json::array();
  for (const auto& c : state.covariances) {
    covs.push_back(std::vector<double>(c.reshaped<Eigen::RowMajor>().begin(), c.reshaped<Eigen::RowMajor>().end()));
  }
  j["covariances_row_major"] = std::move(covs);
  write_json(path, j);
}

GmmState load_gmm_checkpoint(const std::filesystem::path& path) {
  const json j = read_json(path, kGmmFormat);
  GmmState s;
  const std::string reg = j.at("regularizer").get<std::string>();
  if (reg == "zero") {
    s.omega = Regularizer::zero();
  } else if (reg == "tsallis") {
    s.omega = Regularizer::tsallis(j.at("rho").get<double>());
  } else {
    throw FormatError("unknown regularizer " + reg, 0);
  }
  const auto k = j.at("components").get<std::size_t>();
  const auto d = j.at("dim").get<Eigen::Index>();
  s.eta = j.at("eta").get<std::vector<double>>();
  s.means = matrix_from_json(j.at("means"));
  if (s.eta.size() != k || static_cast<std::size_t>(s.means.rows()) != k || s.means.cols() != d) {
    throw FormatError("checkpoint dimensions disagree", 0);
  }
  for (const auto& c : j.at("covariances_row_major")) {
    const auto flat = c.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != d * d) throw FormatError("covariance size mismatch", 0);
    Eigen::MatrixXd m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index q = 0; q < d; ++q) m(r, q) = flat[static_cast<std::size_t>(r * d + q)];
    }
    s.covariances.push_back(std::move(m));
  }
  if (s.covariances.size() != k) throw FormatError("covariance count mismatch", 0);
  return s;
}

void save_vae_checkpoint(const std::filesystem::path& path, const VaeConfig& config, const VaeParams& params) {
  json j;
  j["format"] = kVaeFormat;
  j["version"] = kVersion;
  j["config"] = {{"input_dim", config.input_dim},   {"hidden1", config.hidden1},
                 {"hidden2", config.hidden2},       {"latent_dim", config.latent_dim},
                 {"rho_posterior", config.rho_posterior}, {"rho_obs", config.rho_obs},
                 {"beta", config.beta},             {"learning_rate", config.learning_rate},
                 {"batch_size", config.batch_size}, {"epochs", config.epochs},
                 {"seed", config.seed}};
  json p;
  params.visit([&](const char* name, const Eigen::MatrixXd& m) { p[name] = matrix_to_json(m); });
  j["params"] = std::move(p);
  write_json(path, j);
}

VaeCheckpoint load_vae_checkpoint(const std::filesystem::path& path) {
  const json j = read_json(path, kVaeFormat);
  const json& c = j.at("config");
  VaeCheckpoint out;
  out.config.input_dim = c.at("input_dim").get<std::size_t>();
  out.config.hidden1 = c.at("hidden1").get<std::size_t>();
  out.config.hidden2 = c.at("hidden2").get<std::size_t>();
  out.config.latent_dim = c.at("latent_dim").get<std::size_t>();
  out.config.rho_posterior = c.at("rho_posterior").get<double>();
  out.config.rho_obs = c.at("rho_obs").get<double>();
  out.config.beta = c.at("beta").get<double>();
  out.config.learning_rate = c.at("learning_rate").get<double>();
  out.config.batch_size = c.at("batch_size").get<std::size_t>();
  out.config.epochs = c.at("epochs").get<std::size_t>();
  out.config.seed = c.at("seed").get<std::uint64_t>();
  out.config.validate();
  out.params = VaeParams::zeros(out.config);
  const json& p = j.at("params");
  out.params.visit([&](const char* name, Eigen::MatrixXd& m) {
    Eigen::MatrixXd loaded = matrix_from_json(p.at(name));
    if (loaded.rows() != m.rows() || loaded.cols() != m.cols()) {
      throw FormatError(std::string("parameter shape mismatch for ") + name, 0);
    }
    m = std::move(loaded);
  });
  return out;
}

}  // namespace fyvi
