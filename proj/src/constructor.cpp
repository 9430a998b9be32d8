#include "hydronls/constructor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hydronls/error.hpp"
#include "hydronls/spectral.hpp"

namespace hydronls {
namespace {

bool close(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<double> centre(const std::vector<double>& x0, int n, const char* who) {
  if (x0.empty()) return std::vector<double>(static_cast<std::size_t>(n), 0.0);
  if (static_cast<int>(x0.size()) != n) {
    throw InvalidArgument(std::string(who) + ": point has the wrong number of components");
  }
  for (double c : x0) {
    if (!std::isfinite(c)) throw InvalidArgument(std::string(who) + ": non-finite point");
  }
  return x0;
}

void check_resolution(const RadialProfile& profile, double scale, const Grid& grid,
                      const char* who) {
  const double width = profile.half_width() * scale;
  if (width < 8.0 * grid.spacing()) {
    throw InvalidArgument(std::string(who) +
                          ": grid does not resolve the profile (fewer than 8 points across its "
                          "half-width at this time)");
  }
}

/// Time-dependent factors of the self-similar form.
struct Snapshot {
  double s;
  double a;
  double b;
  double phase;
  std::vector<double> drift;
};

Snapshot snapshot(const SolutionSpec& spec, double t) {
  const TimeFlow& f = spec.flow;
  if (!std::isfinite(t) || t < 0.0) throw InvalidArgument("build_solution: t must be >= 0");
  if (t >= f.valid_until()) throw InvalidArgument("build_solution: t beyond valid_until");
  Snapshot sn;
  if (f.mode() == FlowMode::profile && spec.vc) {
    const auto& vc = *spec.vc;
    if (t >= vc.first_positive_root()) {
      throw InvalidArgument("build_solution: t at or beyond the root of M");
    }
    sn.s = std::sqrt(vc.M(t) / vc.M0());
    sn.a = a_closed_form(vc, t);
    sn.phase = phase_integral(vc, f.gamma0(), t);
  } else {
    sn.s = f.scale(t);
    sn.a = f.a(t);
    sn.phase = f.gamma(t);
  }
  sn.b = f.b(t);
  sn.drift = f.drift(t);
  return sn;
}

/// Periodic (-1, 16, -30, 16, -1) / (12 h^2) stencil along every dimension.
void fd_laplacian(const Grid& g, std::span<const complex> in, std::span<complex> out) {
  const long n = g.points_per_dim();
  const double w = 1.0 / (12.0 * g.spacing() * g.spacing());
  std::fill(out.begin(), out.end(), complex(0.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.unravel(i);
    for (int d = 0; d < g.n_dims(); ++d) {
      auto at = [&](long off) {
        auto j = idx;
        j[d] = static_cast<std::size_t>(((static_cast<long>(idx[d]) + off) % n + n) % n);
        return in[g.ravel(j)];
      };
      out[i] += w * (-at(-2) + 16.0 * at(-1) - 30.0 * in[i] + 16.0 * at(1) - at(2));
    }
  }
}

double norm_sq(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return s;
}

}  // namespace

void SolutionSpec::validate() const {
  const ProfileParams& p = profile.params();
  const int n = flow.n_dims();
  if (p.n != n) throw InvalidArgument("solution spec: profile and flow dimensions differ");
  centre(x0, n, "solution spec");
  if (!close(p.gamma0, flow.gamma0())) {
    throw InvalidArgument("solution spec: profile gamma0 differs from the flow's");
  }
  if (flow.mode() == FlowMode::profile) {
    if (p.mode != PotentialMode::quadratic) {
      throw InvalidArgument("solution spec: profile-mode flow needs a quadratic-potential profile");
    }
    if (!close(p.k, flow.k_or_k1())) {
      throw InvalidArgument("solution spec: profile k differs from the flow's k");
    }
    if (vc && !close(flow.a0(), vc->M0p() / (2.0 * vc->M0()))) {
      throw InvalidArgument("solution spec: flow a0 differs from M'(0)/(2 M(0))");
    }
    return;
  }
  if (vc) throw InvalidArgument("solution spec: virial data applies to profile-mode flows only");
  if (p.mode == PotentialMode::linear) {
    if (!close(p.k1, flow.k_or_k1())) {
      throw InvalidArgument("solution spec: profile k1 differs from the flow's k1");
    }
    for (int i = 0; i < n; ++i) {
      if (!close(p.lambda_dir[static_cast<std::size_t>(i)],
                 flow.lambda()[static_cast<std::size_t>(i)])) {
        throw InvalidArgument("solution spec: profile Lambda differs from the flow's");
      }
    }
  } else if (p.k != 0.0 || flow.k_or_k1() != 0.0) {
    throw InvalidArgument(
        "solution spec: a general flow over a quadratic profile needs k = 0 and k1 = 0");
  }
}

WaveField build_solution(const SolutionSpec& spec, double t, const Grid& grid) {
  if (spec.flow.mode() == FlowMode::general) return build_general_solution(spec, t, grid);
  spec.validate();
  const int n = grid.n_dims();
  if (n != spec.flow.n_dims()) throw InvalidArgument("build_solution: grid dimension mismatch");
  const Snapshot sn = snapshot(spec, t);
  check_resolution(spec.profile, sn.s, grid, "build_solution");
  const auto x0 = centre(spec.x0, n, "build_solution");
  const double amp = std::pow(sn.s, -0.5 * n);
  const double offset = sn.phase + spec.theta + spec.gamma1;
  std::vector<complex> v(grid.size());
  std::array<double, 3> xi{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto x = grid.position(i);
    double r2 = 0.0;
    for (int d = 0; d < n; ++d) {
      const double y = x[d] - x0[d];
      r2 += y * y;
      xi[d] = y / sn.s;
    }
    const double A = spec.profile.at(std::span<const double>(xi.data(), n));
    v[i] = amp * A * std::polar(1.0, 0.25 * sn.a * r2 + offset);
  }
  return WaveField(grid, std::move(v), t);
}

WaveField build_general_solution(const SolutionSpec& spec, double t, const Grid& grid) {
  if (spec.flow.mode() != FlowMode::general) {
    throw InvalidArgument("build_general_solution: flow is not in general mode");
  }
  spec.validate();
  const int n = grid.n_dims();
  if (n != spec.flow.n_dims()) {
    throw InvalidArgument("build_general_solution: grid dimension mismatch");
  }
  const Snapshot sn = snapshot(spec, t);
  check_resolution(spec.profile, sn.s, grid, "build_general_solution");
  const auto x0 = centre(spec.x0, n, "build_general_solution");
  const auto& lambda = spec.flow.lambda();
  const double amp = std::pow(sn.s, -0.5 * n);
  const double offset = sn.phase + spec.theta + spec.gamma1;
  std::vector<complex> v(grid.size());
  std::array<double, 3> xi{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto x = grid.position(i);
    double r2 = 0.0;
    double lx = 0.0;
    for (int d = 0; d < n; ++d) {
      const double y = x[d] - x0[d];
      r2 += y * y;
      lx += lambda[d] * y;
      xi[d] = y / sn.s - sn.drift[d];
    }
    const double A = spec.profile.at(std::span<const double>(xi.data(), n));
    v[i] = amp * A * std::polar(1.0, 0.5 * sn.b * lx + 0.25 * sn.a * r2 + offset);
  }
  return WaveField(grid, std::move(v), t);
}

WaveField build_merle_solution(const RadialProfile& ground, const MerleParams& params, double t,
                               const Grid& grid) {
  if (ground.kind() != ProfileKind::ground_state) {
    throw InvalidArgument("build_merle_solution: needs the ground-state profile");
  }
  const int n = grid.n_dims();
  if (ground.params().n != n) throw InvalidArgument("build_merle_solution: dimension mismatch");
  if (!(params.omega > 0.0) || !std::isfinite(params.T) || !std::isfinite(params.theta)) {
    throw InvalidArgument("build_merle_solution: need omega > 0 and finite T, theta");
  }
  if (!std::isfinite(t) || t == params.T) {
    throw InvalidArgument("build_merle_solution: t must differ from T");
  }
  const auto x0 = centre(params.x0, n, "build_merle_solution");
  const auto x1 = centre(params.x1, n, "build_merle_solution");
  const double tau = t - params.T;
  const double ratio = params.omega / tau;
  check_resolution(ground, std::abs(1.0 / ratio), grid, "build_merle_solution");
  const complex power = std::pow(complex(ratio, 0.0), 0.5 * n);
  const double base_phase = params.theta - params.omega * params.omega / tau;
  std::vector<complex> v(grid.size());
  std::array<double, 3> xi{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto x = grid.position(i);
    double r2 = 0.0;
    for (int d = 0; d < n; ++d) {
      const double y = x[d] - x0[d];
      r2 += y * y;
      xi[d] = ratio * y - x1[d];
    }
    const double R = ground.at(std::span<const double>(xi.data(), n));
    v[i] = power * R * std::polar(1.0, base_phase + r2 / (4.0 * tau));
  }
  return WaveField(grid, std::move(v), t);
}

MerleFit fit_merle_parameters(const SolutionSpec& spec, double t1, double t2, const Grid& grid) {
  if (spec.profile.kind() != ProfileKind::ground_state || spec.flow.mode() != FlowMode::profile) {
    throw InvalidArgument("fit_merle_parameters: needs a profile-mode ground-state solution");
  }
  if (!(t1 < t2)) throw InvalidArgument("fit_merle_parameters: need t1 < t2");
  const int n = grid.n_dims();
  const auto peak_of = [&](const WaveField& f) {
    const auto vals = f.values();
    const auto it = std::max_element(vals.begin(), vals.end(), [](complex a, complex b) {
      return std::abs(a) < std::abs(b);
    });
    return static_cast<std::size_t>(it - vals.begin());
  };
  const WaveField f1 = build_solution(spec, t1, grid);
  const WaveField f2 = build_solution(spec, t2, grid);
  const std::size_t i1 = peak_of(f1);
  const std::size_t i2 = peak_of(f2);
  const double R0 = spec.profile.peak();
  const double s1 = std::pow(R0 / std::abs(f1.values()[i1]), 2.0 / n);
  const double s2 = std::pow(R0 / std::abs(f2.values()[i2]), 2.0 / n);
  if (!(s1 > s2)) throw SolverError("fit_merle_parameters: the solution is not contracting");
  MerleFit fit;
  fit.T = (s1 * t2 - s2 * t1) / (s1 - s2);
  fit.omega = (fit.T - t1) / s1;
  MerleParams mp{fit.omega, fit.T, spec.x0, {}, 0.0};
  const WaveField m1 = build_merle_solution(spec.profile, mp, t1, grid);
  fit.theta = std::remainder(std::arg(f1.values()[i1]) - std::arg(m1.values()[i1]),
                             2.0 * std::numbers::pi);
  if (spec.vc && spec.vc->H() > 0.0) {
    fit.omega_literal = std::sqrt(spec.vc->M0() / spec.vc->H());
    fit.T_literal = -spec.vc->M0p() / (2.0 * spec.vc->H());
  }
  return fit;
}

MadelungFields madelung_decompose(const WaveField& field, double floor) {
  if (!(floor > 0.0)) throw InvalidArgument("madelung_decompose: floor must be positive");
  const Grid& g = field.grid();
  const auto psi = field.values();
  MadelungFields out{g, std::vector<double>(g.size()), {}, std::vector<double>(g.size(), 0.0),
                     std::vector<char>(g.size(), 0)};
  double rho_max = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    out.rho[i] = std::norm(psi[i]);
    rho_max = std::max(rho_max, out.rho[i]);
  }
  if (rho_max == 0.0) throw InvalidArgument("madelung_decompose: field is identically zero");
  const auto deriv = spectral_derivatives(field);
  out.velocity.assign(static_cast<std::size_t>(g.n_dims()), std::vector<double>(g.size(), 0.0));
  const double cut = floor * rho_max;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (out.rho[i] < cut) continue;
    out.mask[i] = 1;
    out.phase[i] = std::arg(psi[i]);
    for (int d = 0; d < g.n_dims(); ++d) {
      out.velocity[d][i] = 2.0 * std::imag(std::conj(psi[i]) * deriv.gradient[d][i]) / out.rho[i];
    }
  }
  return out;
}

WaveField madelung_compose(std::span<const double> rho, std::span<const double> phi,
                           const Grid& grid, double time_tag) {
  if (rho.size() != grid.size() || phi.size() != grid.size()) {
    throw InvalidArgument("madelung_compose: length mismatch with grid");
  }
  std::vector<complex> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(rho[i] >= 0.0)) throw InvalidArgument("madelung_compose: negative or NaN density");
    v[i] = std::polar(std::sqrt(rho[i]), phi[i]);
  }
  return WaveField(grid, std::move(v), time_tag);
}

double field_residual(const WaveField& before, const WaveField& now, const WaveField& after,
                      double dt_fd, std::span<const char> exclude, LaplacianKind laplacian) {
  const Grid& g = now.grid();
  if (!(before.grid() == g) || !(after.grid() == g)) {
    throw InvalidArgument("field_residual: snapshots live on different grids");
  }
  if (!(dt_fd > 0.0)) throw InvalidArgument("field_residual: dt_fd must be positive");
  if (!exclude.empty() && exclude.size() != g.size()) {
    throw InvalidArgument("field_residual: exclusion mask has the wrong length");
  }
  const double sigma = 4.0 / g.n_dims();
  std::vector<complex> lap(g.size());
  if (laplacian == LaplacianKind::spectral) {
    FourierTransform fft(g);
    apply_laplacian(fft, now.values(), lap);
  } else {
    fd_laplacian(g, now.values(), lap);
  }
  const auto p0 = before.values();
  const auto p1 = now.values();
  const auto p2 = after.values();
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!exclude.empty() && exclude[i]) continue;
    const complex dt = (p2[i] - p0[i]) / (2.0 * dt_fd);
    const complex defect = complex(0.0, 1.0) * dt + lap[i] + std::pow(std::abs(p1[i]), sigma) * p1[i];
    worst = std::max(worst, std::abs(defect));
  }
  const double peak = now.max_modulus();
  if (peak == 0.0) return worst;
  return worst / peak;
}

double nls_residual(const SolutionSpec& spec, double t, double dt_fd, const Grid& grid) {
  if (!(dt_fd > 0.0)) throw InvalidArgument("nls_residual: dt_fd must be positive");
  if (t - dt_fd < 0.0) throw InvalidArgument("nls_residual: t - dt_fd must be >= 0");
  const WaveField before = build_solution(spec, t - dt_fd, grid);
  const WaveField now = build_solution(spec, t, grid);
  const WaveField after = build_solution(spec, t + dt_fd, grid);
  if (spec.profile.kind() == ProfileKind::ground_state) return field_residual(before, now, after, dt_fd);

  // Compact support: mask a collar of two grid spacings around the seam.
  const Snapshot sn = snapshot(spec, t);
  const int n = grid.n_dims();
  const auto x0 = centre(spec.x0, n, "nls_residual");
  const double collar = 2.0 * grid.spacing();
  const double support = spec.profile.support_radius();
  std::vector<char> exclude(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto x = grid.position(i);
    std::array<double, 3> y{};
    for (int d = 0; d < n; ++d) y[d] = x[d] - x0[d];
    if (spec.profile.kind() == ProfileKind::dirichlet_ball) {
      const double r = std::sqrt(norm_sq(std::span<const double>(y.data(), n)));
      exclude[i] = std::abs(r - support * sn.s) <= collar;
    } else {
      const double xi = y[0] / sn.s - sn.drift[0];
      exclude[i] = std::abs(std::abs(xi) - support) * sn.s <= collar;
    }
  }
  return field_residual(before, now, after, dt_fd, exclude, LaplacianKind::finite_difference);
}

}  // namespace hydronls
