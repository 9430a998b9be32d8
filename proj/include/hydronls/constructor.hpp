#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hydronls/grid.hpp"
#include "hydronls/profile.hpp"
#include "hydronls/timeflow.hpp"
#include "hydronls/wave_field.hpp"

namespace hydronls {

/// Profile plus time flow: everything needed to evaluate Psi(x, t).
struct SolutionSpec {
  RadialProfile profile;
  TimeFlow flow;
  /// When present, s(t) = sqrt(M(t)/M0) and the phase is gamma0 M0 int dt/M.
  std::optional<VirialCoefficients> vc;
  /// Centre; empty means the origin.
  std::vector<double> x0;
  double theta = 0.0;
  double gamma1 = 0.0;

  /// Throws InvalidArgument when profile, flow and vc disagree.
  void validate() const;
};

/// Self-similar solution at time t; general flows dispatch to build_general_solution.
WaveField build_solution(const SolutionSpec& spec, double t, const Grid& grid);

/// Psi = s^{-n/2} A0((x - x0)/s - d) exp(i[b (Lambda, x - x0)/2 + a |x - x0|^2/4 + gamma + gamma1 + theta]).
WaveField build_general_solution(const SolutionSpec& spec, double t, const Grid& grid);

struct MerleParams {
  double omega = 1.0;
  double T = 1.0;
  std::vector<double> x0;
  std::vector<double> x1;
  double theta = 0.0;
};

/// Minimal-mass blow-up form built on the ground state R:
/// e^{i theta} e^{i(-omega^2/(t-T) + |x-x0|^2/(4(t-T)))} (omega/(t-T))^{n/2} R(omega (x-x0)/(t-T) - x1).
/// The power is the principal complex power, so t < T carries the constant phase e^{i pi n/2}.
WaveField build_merle_solution(const RadialProfile& ground, const MerleParams& params, double t,
                               const Grid& grid);

struct MerleFit {
  double omega;
  double T;
  double theta;
  /// omega^2 = M0/H and T = -M0p/(2H) as printed; absent without virial data.
  std::optional<double> omega_literal;
  std::optional<double> T_literal;
};

/// Fits (omega, T, theta) so that the Merle form reproduces a k = 0 ground-state
/// solution, matching peak amplitude at t1, t2 and the phase at the peak.
MerleFit fit_merle_parameters(const SolutionSpec& spec, double t1, double t2, const Grid& grid);

/// Density, velocity V = 2 grad(phi) and phase on the points where rho >= floor * max(rho).
struct MadelungFields {
  Grid grid;
  std::vector<double> rho;
  std::vector<std::vector<double>> velocity;  ///< one component per dimension, 0 off the mask
  std::vector<double> phase;                  ///< arg(Psi), 0 off the mask
  std::vector<char> mask;
};

MadelungFields madelung_decompose(const WaveField& field, double floor = 1e-8);
WaveField madelung_compose(std::span<const double> rho, std::span<const double> phi,
                           const Grid& grid, double time_tag = 0.0);

enum class LaplacianKind {
  spectral,
  finite_difference,  ///< 4th-order periodic stencil; a kink only spoils two nodes each side
};

/// max |i dPsi/dt + Laplacian Psi + |Psi|^sigma Psi| / max |Psi| over unmasked points, with
/// dPsi/dt a centred difference of the three snapshots.
double field_residual(const WaveField& before, const WaveField& now, const WaveField& after,
                      double dt_fd, std::span<const char> exclude = {},
                      LaplacianKind laplacian = LaplacianKind::spectral);

/// field_residual of build_solution at t - dt_fd, t, t + dt_fd. Compact-support profiles use
/// the finite-difference Laplacian and exclude points within two grid spacings of the seam.
double nls_residual(const SolutionSpec& spec, double t, double dt_fd, const Grid& grid);

}  // namespace hydronls
