#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hydronls/error.hpp"
#include "hydronls/splitstep.hpp"

namespace hydronls::cli {

inline constexpr const char* kSchema = "hydronls/1";

/// Malformed or inconsistent scenario config (exit code 2).
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum ExitCode : int { ok = 0, config_error = 2, solver_failure = 3, verification_failure = 4 };

struct ProfileConfig {
  std::string kind = "ground_state";  ///< ground_state | dirichlet | stark
  int n = 1;
  double k = 0.0;
  double gamma0 = 1.0;
  double k1 = 0.0;
  double radius = 0.0;  ///< ball radius or interval half-width
  double tol = 1e-10;
  std::optional<double> node_spacing;
  std::optional<double> max_radius;
  std::optional<double> scan_start;
};

struct GridConfig {
  int points = 1024;
  double half_width = 30.0;
};

struct SolutionConfig {
  std::string mode = "auto";  ///< auto | profile | general
  double a0 = 0.0;
  double b0 = 0.0;
  std::vector<double> x0;
  std::vector<double> lambda;
  double theta = 0.0;
  double gamma1 = 0.0;
  /// Measure (H, M0, M0p, N) on Psi0 and report the virial classification.
  bool virial = false;
  /// Relative K = 0 band for the measured classification.
  double virial_zero_tol = 1e-8;
};

struct VirialConfig {
  double H = 0.0;
  double M0 = 1.0;
  double M0p = 0.0;
  double N = 1.0;
  int n = 1;
};

struct InitialConfig {
  std::string source = "solution";  ///< solution | gaussian | wfield
  double amplitude = 1.0;
  double width = 1.0;
  double chirp = 0.0;
  std::vector<double> center;
  std::vector<double> kick;
  std::string path;
};

struct VerifyConfig {
  double l2_tolerance = 1e-5;
  double mass_tolerance = 1e-10;
  bool rate_fit = false;
  /// Grid for the rate-fit samples near T; defaults to the main grid.
  std::optional<GridConfig> rate_grid;
};

struct SweepConfig {
  std::vector<double> H;
  std::vector<double> M0;
  std::vector<double> M0p;
  int n = 1;
  int random_count = 0;
  std::vector<double> H_range;
  std::vector<double> M0_range;
  std::vector<double> M0p_range;
};

struct ScenarioConfig {
  std::string schema;
  std::uint64_t seed = 0;
  std::optional<ProfileConfig> profile;
  std::optional<GridConfig> grid;
  std::optional<SolutionConfig> solution;
  std::optional<VirialConfig> virial;
  std::optional<EvolveConfig> evolve;
  std::optional<InitialConfig> initial;
  std::optional<VerifyConfig> verify;
  std::optional<SweepConfig> sweep;
  std::vector<double> times;
  std::vector<double> lambda;
};

/// Validates types, ranges and key names. Throws ConfigError.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError when a block needed by `command` is missing.
void require_blocks(const ScenarioConfig& cfg, const std::string& command);

struct RunOptions {
  std::filesystem::path out_dir = "out";
  int threads = 1;
  bool verbose = false;
  std::ostream* log = nullptr;
};

struct RunResult {
  int exit_code = ok;
  nlohmann::json summary;
};

const std::vector<std::string>& commands();

/// Runs one command; module exceptions propagate (see error_exit_code).
RunResult run_command(const std::string& command, const ScenarioConfig& cfg, const RunOptions& opt);

/// Exit code and reason code for an exception escaping run_command.
std::pair<int, std::string> classify_error(const std::exception& e);

/// Writes pretty JSON; throws SolverError if any number is non-finite.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace hydronls::cli
