#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hydronls/wave_field.hpp"

namespace hydronls {

struct FunctionalReport {
  double N = 0.0;
  std::vector<double> P;        ///< Im int Psi grad(conj Psi)
  std::vector<double> P_tilde;  ///< int rho V over the Madelung mask
  double H = 0.0;
  double H_hydro = 0.0;
  double M = 0.0;
  double Mp = 0.0;  ///< 2 int (x, V) rho
  std::vector<double> lambda;
  std::optional<double> Q;         ///< int (Lambda, x) rho
  std::optional<double> P_lambda;  ///< (P_tilde, Lambda)
  double grad_norm_sq = 0.0;
  double amp_max = 0.0;
  double boundary_fraction = 0.0;  ///< max boundary density / max density
};

struct FunctionalOptions {
  double floor = 1e-12;        ///< Madelung mask threshold relative to max density
  double containment = 1e-10;  ///< allowed boundary density fraction
};

/// All integral functionals of one snapshot. `lambda` may be empty (no Q) or have n_dims entries.
/// Throws InvalidArgument when the field is not contained.
FunctionalReport functionals(const WaveField& field, std::span<const double> lambda = {},
                             const FunctionalOptions& opt = {});

/// Q^2 <= |Lambda|^2 N M, with 1e-12 relative slack.
bool hoelder_check(const FunctionalReport& report, std::span<const double> lambda);
/// Q^2 / (|Lambda|^2 N M).
double hoelder_ratio(const FunctionalReport& report, std::span<const double> lambda);

enum class MassOrdering { below, equal, above };
std::string to_string(MassOrdering m);

/// Compares sqrt(N) with the ground-state L2 norm; "equal" within 1e-6 relative.
MassOrdering mass_threshold_check(const FunctionalReport& report, double ground_state_norm);

struct RateFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::pair<double, double> window;
  int samples = 0;
};

/// Least-squares slope of log(value) against -log(T - t) over samples with t in window.
RateFit fit_rate(std::span<const std::pair<double, double>> series, double T,
                 std::pair<double, double> window);

/// `count` times in window whose distances to T are geometrically spaced.
std::vector<double> rate_sample_times(double T, std::pair<double, double> window, int count = 32);

/// Default fit window (0.5 T, 0.9 T).
inline std::pair<double, double> default_rate_window(double T) { return {0.5 * T, 0.9 * T}; }

nlohmann::json to_json(const FunctionalReport& report);
nlohmann::json to_json(const RateFit& fit);

void write_series_csv(const std::filesystem::path& path,
                      std::span<const std::pair<double, double>> series);

}  // namespace hydronls
