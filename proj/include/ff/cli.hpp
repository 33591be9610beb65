#ifndef FF_CLI_HPP
#define FF_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace ff::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Effective settings of one run. Precedence, lowest first: --config file,
/// parameter JSON passed with -i (rigidity, depend, converge), --set, flags.
struct RunConfig {
  std::string subcommand;
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path output_dir = ".";
  double p = 4;
  /// Negative selects the calibrated threshold.
  double tol = -1;
  /// 0 selects the subcommand default.
  int dict_size = 0;
  bool force = false;
  std::uint64_t seed = 0;
  /// Subcommand parameters (eps, t, s, family, resolution, A0, f0, ...).
  nlohmann::json params = nlohmann::json::object();
};

const std::vector<std::string>& subcommands();

/// Flat `key = <JSON value>` lines; blank lines and lines starting with '#'
/// are skipped. Bare words that are not JSON are read as strings.
nlohmann::json read_config_file(const std::filesystem::path& path);

/// Moves the common keys (p, tol, dict_size, seed, force, inputs, output_dir)
/// of `settings` into `config` and merges the rest into config.params.
void apply_settings(RunConfig& config, const nlohmann::json& settings);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Each runner validates its inputs, writes its artifacts and manifest.json
/// into output_dir and returns the exit status. Errors propagate as
/// ValidationError / NumericalError.
int run_fixture(const RunConfig& config);
int run_forms(const RunConfig& config);
int run_check_gcr(const RunConfig& config);
int run_reconstruct(const RunConfig& config);
int run_align(const RunConfig& config);
int run_rigidity(const RunConfig& config);
int run_depend(const RunConfig& config);
int run_converge(const RunConfig& config);

/// Dispatches on config.subcommand and maps errors to exit codes:
/// 0 success, 2 validation failure, 3 numerical failure.
int execute(const RunConfig& config);

/// Command-line entry point.
int run(int argc, const char* const* argv);

}  // namespace ff::cli

#endif  // FF_CLI_HPP
