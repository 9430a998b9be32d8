#pragma once

#include <array>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace hydronls {

/// Which potential multiplies the amplitude in the profile equation
///   Laplacian(u) + |u|^sigma u = W(x) u.
enum class PotentialMode {
  quadratic,  ///< W = k |x|^2 + gamma0 (radial)
  linear,     ///< W = k1 (Lambda, x) + gamma0 (1D interval)
};

struct ProfileParams {
  int n = 1;
  double sigma = 4.0;
  PotentialMode mode = PotentialMode::quadratic;
  double k = 0.0;
  double gamma0 = 1.0;
  double k1 = 0.0;
  std::array<double, 3> lambda_dir{1.0, 0.0, 0.0};

  /// W evaluated at signed coordinate (linear mode) or radius (quadratic mode).
  double potential(double r_or_x) const;
};

/// Quadratic-potential parameters with the critical exponent sigma = 4/n.
ProfileParams quadratic_params(int n, double k, double gamma0);
/// 1D linear-potential parameters (sigma = 4).
ProfileParams linear_params(double k1, double gamma0);

enum class ProfileKind {
  ground_state,    ///< whole-space decaying solution, analytic tail past the last node
  dirichlet_ball,  ///< radial, zero at and beyond support_radius
  interval,        ///< 1D on [-support_radius, support_radius], zero outside
};

/// Sampled amplitude profile A0. Radial kinds are sampled on r in [0, r_last];
/// the interval kind on x in [-l, l].
class RadialProfile {
 public:
  RadialProfile(ProfileParams params, ProfileKind kind, std::vector<double> nodes,
                std::vector<double> values, double u_center, double support_radius);

  const ProfileParams& params() const { return params_; }
  ProfileKind kind() const { return kind_; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> values() const { return values_; }
  double u_center() const { return u_center_; }
  double support_radius() const { return support_radius_; }
  bool is_radial() const { return kind_ != ProfileKind::interval; }

  /// Cubic interpolation at radius r (radial kinds) or coordinate x (interval).
  double operator()(double r_or_x) const;
  /// Value at a point xi of R^n: radial kinds use |xi|, the interval kind xi[0].
  double at(std::span<const double> xi) const;

  double peak() const;
  /// Radius (or half of the full width) at which the profile falls to half its peak.
  double half_width() const;

 private:
  double interpolate(double s) const;
  double tail(double r) const;

  ProfileParams params_;
  ProfileKind kind_;
  std::vector<double> nodes_;
  std::vector<double> values_;
  double u_center_;
  double support_radius_;
};

struct ProfileOptions {
  double node_spacing = 2.5e-3;
  /// Ground state: integration window in units of the decay length 1/sqrt(gamma0).
  double max_radius = 60.0;
  int max_bisections = 400;
  int max_scan = 400;
  /// Dirichlet solves: first shooting parameter of the upward scan (u(0) for the
  /// ball, the endpoint slope for the interval). Unset means 1e-4 and 1e-14.
  std::optional<double> scan_start;
};

/// Positive radially decreasing solution of Laplacian(u) + u^{sigma+1} - u = 0.
RadialProfile ground_state(int n, double tol, const ProfileOptions& opt = {});

/// Positive radial solution of Laplacian(u) + u^{sigma+1} = (k r^2 + gamma0) u on a
/// ball with u = 0 on its boundary. Reports the first solution met scanning u(0) upward.
RadialProfile dirichlet_profile(int n, double k, double gamma0, double ball_radius, double tol,
                                const ProfileOptions& opt = {});

/// Positive solution of u'' + u^5 = (k1 x + gamma0) u on [-l, l], u(+-l) = 0, by
/// shooting on the slope at the left endpoint.
RadialProfile stark_profile_1d(double k1, double gamma0, double half_interval, double tol,
                               const ProfileOptions& opt = {});

/// Max interior-node defect of the governing ODE using 4th-order finite differences.
double profile_residual(const RadialProfile& profile);

/// Whole-space integrals of the profile (radial kinds integrate over the full
/// ball / line using the surface measure).
struct ProfileNorms {
  double mass;           ///< int u^2
  double grad_sq;        ///< int |grad u|^2
  double power;          ///< int |u|^{sigma+2}
  double second_moment;  ///< int |x|^2 u^2
  double energy;         ///< grad_sq - 2/(sigma+2) power
};
ProfileNorms profile_norms(const RadialProfile& profile);

/// CSV (r,u) plus a JSON sidecar next to it ("<stem>.json").
void write_profile(const std::filesystem::path& csv_path, const RadialProfile& profile);

}  // namespace hydronls
