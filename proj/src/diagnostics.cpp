#include "hydronls/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "hydronls/error.hpp"
#include "hydronls/quadrature.hpp"
#include "hydronls/spectral.hpp"
#include "hydronls/text_io.hpp"

namespace hydronls {

FunctionalReport functionals(const WaveField& field, std::span<const double> lambda,
                             const FunctionalOptions& opt) {
  const Grid& g = field.grid();
  const int n = g.n_dims();
  const auto nd = static_cast<std::size_t>(n);
  if (!lambda.empty() && lambda.size() != nd) {
    throw InvalidArgument("functionals: lambda must have one entry per dimension");
  }
  if (!(opt.floor > 0.0) || !(opt.containment > 0.0)) {
    throw InvalidArgument("functionals: floor and containment must be positive");
  }
  if (!field.all_finite()) throw InvalidArgument("functionals: non-finite field");

  const auto psi = field.values();
  const std::size_t size = g.size();
  std::vector<double> rho(size);
  double rho_max = 0.0;
  double rho_boundary = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    rho[i] = std::norm(psi[i]);
    rho_max = std::max(rho_max, rho[i]);
    if (g.on_boundary(i)) rho_boundary = std::max(rho_boundary, rho[i]);
  }
  if (rho_max == 0.0) throw InvalidArgument("functionals: field is identically zero");

  FunctionalReport r;
  r.boundary_fraction = rho_boundary / rho_max;
  if (r.boundary_fraction > opt.containment) {
    throw InvalidArgument("functionals: field not contained (boundary density fraction " +
                          format_number(r.boundary_fraction) + ")");
  }
  r.amp_max = std::sqrt(rho_max);

  const double sigma = 4.0 / n;
  const auto deriv = spectral_derivatives(field);
  std::vector<double> amp(size);
  for (std::size_t i = 0; i < size; ++i) amp[i] = std::sqrt(rho[i]);
  const auto grad_amp = spectral_gradient(g, amp);
  const double cut = opt.floor * rho_max;

  std::vector<double> w(size);
  auto integrate = [&](auto&& f) {
    for (std::size_t i = 0; i < size; ++i) w[i] = f(i);
    return quadrature_integrate(w, g);
  };

  r.N = integrate([&](std::size_t i) { return rho[i]; });
  r.grad_norm_sq = integrate([&](std::size_t i) {
    double s = 0.0;
    for (std::size_t d = 0; d < nd; ++d) s += std::norm(deriv.gradient[d][i]);
    return s;
  });
  const double power = integrate([&](std::size_t i) { return std::pow(rho[i], sigma / 2.0 + 1.0); });
  r.H = r.grad_norm_sq - 2.0 / (sigma + 2.0) * power;

  // Current j = Im(conj(Psi) grad Psi) = rho grad(phi) = rho V / 2.
  auto current = [&](std::size_t d, std::size_t i) {
    return std::imag(std::conj(psi[i]) * deriv.gradient[d][i]);
  };
  r.P.resize(nd);
  r.P_tilde.resize(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    r.P[d] = -integrate([&](std::size_t i) { return current(d, i); });
    r.P_tilde[d] = integrate([&](std::size_t i) {
      return rho[i] >= cut ? 2.0 * current(d, i) : 0.0;
    });
  }

  r.H_hydro = integrate([&](std::size_t i) {
    if (rho[i] < cut) return 0.0;
    double v2 = 0.0;
    double ga2 = 0.0;
    for (std::size_t d = 0; d < nd; ++d) {
      const double v = 2.0 * current(d, i) / rho[i];
      v2 += v * v;
      ga2 += grad_amp[d][i] * grad_amp[d][i];
    }
    return rho[i] * v2 / 4.0 + ga2 - 2.0 * std::pow(rho[i], sigma / 2.0 + 1.0) / (sigma + 2.0);
  });

  r.M = integrate([&](std::size_t i) {
    const auto x = g.position(i);
    double r2 = 0.0;
    for (std::size_t d = 0; d < nd; ++d) r2 += x[d] * x[d];
    return r2 * rho[i];
  });
  r.Mp = integrate([&](std::size_t i) {
    if (rho[i] < cut) return 0.0;
    const auto x = g.position(i);
    double xv = 0.0;
    for (std::size_t d = 0; d < nd; ++d) xv += x[d] * 2.0 * current(d, i);
    return 2.0 * xv;
  });

  if (!lambda.empty()) {
    r.lambda.assign(lambda.begin(), lambda.end());
    r.Q = integrate([&](std::size_t i) {
      const auto x = g.position(i);
      double lx = 0.0;
      for (std::size_t d = 0; d < nd; ++d) lx += lambda[d] * x[d];
      return lx * rho[i];
    });
    double pl = 0.0;
    for (std::size_t d = 0; d < nd; ++d) pl += lambda[d] * r.P_tilde[d];
    r.P_lambda = pl;
  }
  return r;
}

double hoelder_ratio(const FunctionalReport& report, std::span<const double> lambda) {
  if (!report.Q) throw InvalidArgument("hoelder_check: report carries no Q");
  const double l2 = std::inner_product(lambda.begin(), lambda.end(), lambda.begin(), 0.0);
  const double bound = l2 * report.N * report.M;
  if (!(bound > 0.0)) throw InvalidArgument("hoelder_check: |Lambda|^2 N M must be positive");
  return (*report.Q) * (*report.Q) / bound;
}

bool hoelder_check(const FunctionalReport& report, std::span<const double> lambda) {
  return hoelder_ratio(report, lambda) <= 1.0 + 1e-12;
}

std::string to_string(MassOrdering m) {
  switch (m) {
    case MassOrdering::below: return "below";
    case MassOrdering::equal: return "equal";
    case MassOrdering::above: return "above";
  }
  return "unknown";
}

MassOrdering mass_threshold_check(const FunctionalReport& report, double ground_state_norm) {
  if (!(ground_state_norm > 0.0)) {
    throw InvalidArgument("mass_threshold_check: ground-state norm must be positive");
  }
  const double norm = std::sqrt(report.N);
  if (std::abs(norm - ground_state_norm) <= 1e-6 * ground_state_norm) return MassOrdering::equal;
  return norm < ground_state_norm ? MassOrdering::below : MassOrdering::above;
}

RateFit fit_rate(std::span<const std::pair<double, double>> series, double T,
                 std::pair<double, double> window) {
  const auto [lo, hi] = window;
  if (!(lo < hi) || !(hi < T)) {
    throw InvalidArgument("fit_rate: degenerate window (need t_lo < t_hi < T)");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [t, v] : series) {
    if (t < lo || t > hi) continue;
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("fit_rate: values in the window must be positive and finite");
    }
    xs.push_back(-std::log(T - t));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 8) throw InvalidArgument("fit_rate: fewer than 8 samples in the window");
  const double m = static_cast<double>(xs.size());
  const double xm = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
  const double ym = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - xm) * (xs[i] - xm);
    sxy += (xs[i] - xm) * (ys[i] - ym);
    syy += (ys[i] - ym) * (ys[i] - ym);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_rate: degenerate window (all samples coincide)");
  RateFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = ym - fit.exponent * xm;
  fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  fit.window = window;
  fit.samples = static_cast<int>(xs.size());
  return fit;
}

std::vector<double> rate_sample_times(double T, std::pair<double, double> window, int count) {
  const auto [lo, hi] = window;
  if (!(lo < hi) || !(hi < T) || count < 2) {
    throw InvalidArgument("rate_sample_times: need t_lo < t_hi < T and count >= 2");
  }
  const double d0 = T - lo;
  const double d1 = T - hi;
  std::vector<double> t(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / (count - 1);
    t[static_cast<std::size_t>(i)] = T - d0 * std::pow(d1 / d0, f);
  }
  t.front() = lo;
  t.back() = hi;
  return t;
}

nlohmann::json to_json(const FunctionalReport& r) {
  nlohmann::json j{{"N", r.N},
                   {"P", r.P},
                   {"P_tilde", r.P_tilde},
                   {"H", r.H},
                   {"H_hydro", r.H_hydro},
                   {"M", r.M},
                   {"Mp", r.Mp},
                   {"grad_norm_sq", r.grad_norm_sq},
                   {"amp_max", r.amp_max},
                   {"boundary_fraction", r.boundary_fraction}};
  if (r.Q) {
    j["lambda"] = r.lambda;
    j["Q"] = *r.Q;
    j["P_lambda"] = *r.P_lambda;
  }
  return j;
}

nlohmann::json to_json(const RateFit& f) {
  return {{"exponent", f.exponent},
          {"intercept", f.intercept},
          {"r_squared", f.r_squared},
          {"window", {f.window.first, f.window.second}},
          {"samples", f.samples}};
}

void write_series_csv(const std::filesystem::path& path,
                      std::span<const std::pair<double, double>> series) {
  CsvWriter csv(path, {"t", "value"});
  for (const auto& [t, v] : series) csv.row({t, v});
}

}  // namespace hydronls
