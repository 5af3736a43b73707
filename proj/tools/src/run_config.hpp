#ifndef FYVI_TOOLS_RUN_CONFIG_HPP
#define FYVI_TOOLS_RUN_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fyvi::cli {

/// Bad command-line or config-file input; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric failure inside a run, re-labelled with module and seed; maps to
/// exit code 1.
class RunFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumeric = 1;
inline constexpr int kExitUsage = 2;

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

struct RunConfig {
  std::string command;
  std::vector<std::string> argv;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  std::filesystem::path config_path;  ///< empty if none
  ConfigEntries config;
};

/// key=value lines; blank lines and lines starting with '#' are skipped.
/// Keys are normalized to flag spelling ("max_iter" -> "max-iter").
ConfigEntries parse_config(const std::string& text);
ConfigEntries read_config_file(const std::filesystem::path& path);

/// Comma-separated lists; any malformed or empty item is a UsageError.
std::vector<double> parse_double_list(const std::string& text);

/// Creates the directory (and parents) if absent.
void ensure_out_dir(const std::filesystem::path& dir);

/// Writes run_manifest.txt: command line, config file entries, and the
/// effective option values after merging.
void write_manifest(const RunConfig& run, const std::string& effective_options);

/// %.10g, the CSV number format used throughout.
std::string fmt(double v);

}  // namespace fyvi::cli

#endif  // FYVI_TOOLS_RUN_CONFIG_HPP
