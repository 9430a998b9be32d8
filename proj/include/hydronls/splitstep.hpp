#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hydronls/wave_field.hpp"

namespace hydronls {

enum class SplittingScheme {
  strang,    ///< second order
  yoshida4,  ///< triple-jump composition of three Strang steps, fourth order
};

struct EvolveConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  /// Nonlinearity exponent; unset means the critical value 4/n.
  std::optional<double> sigma;
  /// Sorted, within [0, t_end]; each is hit exactly.
  std::vector<double> snapshot_times;
  double containment_threshold = 1e-8;
  double amp_ceiling = 1e6;
  /// false drops the |Psi|^sigma term (free Schroedinger flow).
  bool nonlinear = true;
  SplittingScheme scheme = SplittingScheme::strang;
};

enum class Termination { completed, amp_ceiling, containment_lost };
std::string to_string(Termination t);

struct EvolveResult {
  std::vector<WaveField> snapshots;
  /// State at t_reached (t_end unless terminated early).
  WaveField final_state;
  Termination reason = Termination::completed;
  double t_reached = 0.0;
  long steps = 0;
  double boundary_fraction = 0.0;  ///< at t_reached
  std::vector<std::string> warnings;
};

/// Strang splitting (default): half nonlinear rotation, exact linear step in Fourier space,
/// half rotation.
/// Each interval between consecutive stop times (snapshots, t_end) is divided into equal steps
/// no longer than cfg.dt. Throws InvalidArgument on a bad config or uncontained psi0.
EvolveResult evolve(const WaveField& psi0, const EvolveConfig& cfg);

/// ||num - an|| / ||an|| in L2 for each snapshot; `analytic` is called with each time_tag.
std::vector<double> compare(const std::function<WaveField(double)>& analytic,
                            std::span<const WaveField> numeric);

double relative_l2_error(const WaveField& numeric, const WaveField& reference);

/// Termination record (no field data).
nlohmann::json to_json(const EvolveResult& result);

}  // namespace hydronls
