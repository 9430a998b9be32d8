#include "hydronls/splitstep.hpp"

#include <algorithm>
#include <cmath>

#include "hydronls/error.hpp"
#include "hydronls/spectral.hpp"
#include "hydronls/text_io.hpp"

namespace hydronls {
namespace {

std::vector<std::size_t> boundary_indices(const Grid& g) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.on_boundary(i)) idx.push_back(i);
  }
  return idx;
}

double boundary_fraction(std::span<const complex> psi, std::span<const std::size_t> boundary,
                         double& rho_max) {
  rho_max = 0.0;
  for (const auto& v : psi) rho_max = std::max(rho_max, std::norm(v));
  double b = 0.0;
  for (auto i : boundary) b = std::max(b, std::norm(psi[i]));
  return rho_max > 0.0 ? b / rho_max : 0.0;
}

void validate(const WaveField& psi0, const EvolveConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw InvalidArgument("evolve: dt must be positive");
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) {
    throw InvalidArgument("evolve: t_end must be finite and non-negative");
  }
  if (cfg.sigma && !(*cfg.sigma > 0.0)) throw InvalidArgument("evolve: sigma must be positive");
  if (!(cfg.containment_threshold > 0.0) || !(cfg.amp_ceiling > 0.0)) {
    throw InvalidArgument("evolve: containment_threshold and amp_ceiling must be positive");
  }
  if (!std::is_sorted(cfg.snapshot_times.begin(), cfg.snapshot_times.end())) {
    throw InvalidArgument("evolve: snapshot_times must be sorted");
  }
  for (double t : cfg.snapshot_times) {
    if (!(t >= 0.0 && t <= cfg.t_end)) throw InvalidArgument("evolve: snapshot time outside [0, t_end]");
  }
  if (!psi0.all_finite()) throw InvalidArgument("evolve: initial field is not finite");
}

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::amp_ceiling: return "amp_ceiling";
    case Termination::containment_lost: return "containment_lost";
  }
  return "unknown";
}

EvolveResult evolve(const WaveField& psi0, const EvolveConfig& cfg) {
  validate(psi0, cfg);
  const Grid& g = psi0.grid();
  const double sigma = cfg.sigma.value_or(4.0 / g.n_dims());
  const auto boundary = boundary_indices(g);

  EvolveResult out{{}, psi0, Termination::completed, 0.0, 0, 0.0, {}};
  double rho_max = 0.0;
  out.boundary_fraction = boundary_fraction(psi0.values(), boundary, rho_max);
  if (out.boundary_fraction > cfg.containment_threshold) {
    throw InvalidArgument("evolve: initial field not contained (boundary density fraction " +
                          format_number(out.boundary_fraction) + ")");
  }
  if (rho_max == 0.0) throw InvalidArgument("evolve: initial field is identically zero");
  const double h = g.spacing();
  if (cfg.dt > h * h) {
    out.warnings.push_back("dt = " + format_number(cfg.dt) + " exceeds spacing^2 = " +
                           format_number(h * h));
  }

  std::vector<double> stops(cfg.snapshot_times);
  stops.push_back(cfg.t_end);
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  FourierTransform fft(g);
  const auto k2 = squared_wavenumbers(g);
  std::vector<double> weights{1.0};
  if (cfg.scheme == SplittingScheme::yoshida4) {
    const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
    weights = {w1, 1.0 - 2.0 * w1, w1};
  }
  std::vector<complex> psi(psi0.values().begin(), psi0.values().end());
  std::vector<std::vector<complex>> multipliers(weights.size(), std::vector<complex>(g.size()));
  double multiplier_step = -1.0;
  // Nonlinear rotations leave |Psi| unchanged, so adjacent half steps merge into one.
  double pending = 0.0;
  auto rotate = [&]() {
    if (pending == 0.0 || !cfg.nonlinear) {
      pending = 0.0;
      return;
    }
    for (auto& v : psi) v *= std::polar(1.0, std::pow(std::norm(v), sigma / 2.0) * pending);
    pending = 0.0;
  };

  double t = 0.0;
  std::size_t next_snap = 0;
  auto emit_snapshots = [&]() {
    while (next_snap < cfg.snapshot_times.size() && cfg.snapshot_times[next_snap] <= t) {
      rotate();
      out.snapshots.emplace_back(g, psi, cfg.snapshot_times[next_snap]);
      ++next_snap;
    }
  };
  emit_snapshots();

  for (double stop : stops) {
    if (stop <= t) continue;
    const double span = stop - t;
    const auto steps = static_cast<long>(std::max(1.0, std::ceil(span / cfg.dt * (1.0 - 1e-12))));
    const double step = span / static_cast<double>(steps);
    if (step != multiplier_step) {
      for (std::size_t w = 0; w < weights.size(); ++w) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          multipliers[w][i] = std::polar(1.0, -k2[i] * weights[w] * step);
        }
      }
      multiplier_step = step;
    }
    for (long s = 0; s < steps; ++s) {
      for (std::size_t w = 0; w < weights.size(); ++w) {
        pending += weights[w] * step / 2.0;
        rotate();
        fft.forward(psi);
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= multipliers[w][i];
        fft.backward(psi);
        pending += weights[w] * step / 2.0;
      }
      t = s + 1 == steps ? stop : t + step;
      ++out.steps;

      out.boundary_fraction = boundary_fraction(psi, boundary, rho_max);
      if (!std::isfinite(rho_max) || std::sqrt(rho_max) > cfg.amp_ceiling) {
        out.reason = Termination::amp_ceiling;
      } else if (out.boundary_fraction > cfg.containment_threshold) {
        out.reason = Termination::containment_lost;
      }
      if (out.reason != Termination::completed) break;
    }
    if (out.reason != Termination::completed) break;
    emit_snapshots();
  }
  rotate();
  out.t_reached = t;
  bool finite = true;
  for (const auto& v : psi) finite = finite && std::isfinite(v.real()) && std::isfinite(v.imag());
  if (finite) {
    out.final_state = WaveField(g, std::move(psi), t);
  } else {
    out.final_state = WaveField(g, t);
    out.warnings.push_back("final state is not finite; replaced by zeros");
  }
  return out;
}

double relative_l2_error(const WaveField& numeric, const WaveField& reference) {
  if (!(numeric.grid() == reference.grid())) throw InvalidArgument("compare: grid mismatch");
  const auto a = numeric.values();
  const auto b = reference.values();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  if (!(den > 0.0)) throw InvalidArgument("compare: reference field is zero");
  return std::sqrt(num / den);
}

std::vector<double> compare(const std::function<WaveField(double)>& analytic,
                            std::span<const WaveField> numeric) {
  std::vector<double> err;
  err.reserve(numeric.size());
  for (const auto& f : numeric) {
    const WaveField ref = analytic(f.time_tag());
    if (ref.time_tag() != f.time_tag()) throw InvalidArgument("compare: time mismatch");
    err.push_back(relative_l2_error(f, ref));
  }
  return err;
}

nlohmann::json to_json(const EvolveResult& r) {
  nlohmann::json times = nlohmann::json::array();
  for (const auto& s : r.snapshots) times.push_back(s.time_tag());
  return {{"reason", to_string(r.reason)},
          {"t_reached", r.t_reached},
          {"steps", r.steps},
          {"boundary_fraction", r.boundary_fraction},
          {"snapshot_times", times},
          {"warnings", r.warnings}};
}

}  // namespace hydronls
