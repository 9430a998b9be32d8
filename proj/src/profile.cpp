#include "hydronls/profile.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "hydronls/error.hpp"
#include "hydronls/text_io.hpp"
#include "json.hpp"

namespace hydronls {
namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 2>;

constexpr long kMaxStepsPerShot = 2'000'000;

/// |u|^sigma u for the critical exponents 4, 2, 4/3.
double focusing(double u, int n) {
  switch (n) {
    case 1: {
      const double u2 = u * u;
      return u2 * u2 * u;
    }
    case 2:
      return u * u * u;
    default:
      return std::cbrt(u * u * u * u) * u;
  }
}

void check_tol(double tol, const char* who) {
  if (!(tol >= 1e-12 && tol <= 1e-4)) {
    throw InvalidArgument(std::string(who) + ": tol must lie in [1e-12, 1e-4]");
  }
}

/// u'' = -(n-1)/r u' - |u|^sigma u + W(r) u. With radial = false the first-order
/// term is dropped and the independent variable is the signed coordinate.
struct ProfileRhs {
  ProfileParams params;
  bool radial = true;

  void operator()(const State& y, State& dy, double r) const {
    dy[0] = y[1];
    const double damping = radial && params.n > 1 ? (params.n - 1) / r * y[1] : 0.0;
    dy[1] = -damping - focusing(y[0], params.n) + params.potential(r) * y[0];
  }
};

enum class Outcome { crossed_zero, turned_up, reached_end };

struct Shot {
  Outcome outcome;
  double t_stop;
};

/// Integrates from (t0, y0) towards t_end with adaptive Dormand-Prince steps.
/// Steps are clipped to land exactly on the requested abscissae (those > t0),
/// where (u, u') is recorded until the shot stops. Shots that share abscissae
/// follow identical step sequences.
Shot shoot(const ProfileRhs& rhs, const State& y0, double t0, double t_end, double rtol,
           double atol, bool stop_on_turn_up, std::span<const double> sample_at = {},
           std::vector<State>* samples = nullptr) {
  auto stepper = odeint::make_controlled(atol, rtol, odeint::runge_kutta_dopri5<State>());
  std::size_t next = 0;
  while (next < sample_at.size() && sample_at[next] <= t0) ++next;
  State y = y0;
  double t = t0;
  double dt = std::min(1e-3, 0.01 * (t_end - t0));
  for (long step = 0; step < kMaxStepsPerShot; ++step) {
    const double target = next < sample_at.size() ? std::min(sample_at[next], t_end) : t_end;
    const bool clipped = target - t <= dt;
    double h = clipped ? target - t : dt;
    if (stepper.try_step(rhs, y, t, h) == odeint::fail) {
      dt = h;
      continue;
    }
    if (clipped) {
      t = target;
      dt = std::max(dt, h);
    } else {
      dt = h;
    }
    if (next < sample_at.size() && t == sample_at[next]) {
      if (samples != nullptr) samples->push_back(y);
      ++next;
    }
    if (!(std::isfinite(y[0]) && std::isfinite(y[1]))) return {Outcome::turned_up, t};
    if (y[0] < 0.0) return {Outcome::crossed_zero, t};
    if (stop_on_turn_up && (y[1] > 0.0 || y[0] > 1e8)) return {Outcome::turned_up, t};
    if (t >= t_end) return {Outcome::reached_end, t_end};
  }
  throw SolverError("shooting: integration step cap exceeded");
}

/// Start just off the origin with the series u = u0 + c r^2/2, c = (W(0) u0 - |u0|^s u0)/n.
State radial_start(const ProfileParams& p, double u0, double r0) {
  const double c = (p.potential(0.0) * u0 - focusing(u0, p.n)) / p.n;
  return {u0 + 0.5 * c * r0 * r0, c * r0};
}

/// d/dr log of r^{1-n/2} K_{n/2-1}(r), the decaying linear solution for gamma0 = 1.
double decaying_log_derivative(int n, double r) {
  switch (n) {
    case 1:
      return -1.0;
    case 3:
      return -1.0 - 1.0 / r;
    default:
      return -std::cyl_bessel_k(1.0, r) / std::cyl_bessel_k(0.0, r);
  }
}

double surface_measure(int n) {
  switch (n) {
    case 1:
      return 2.0;
    case 2:
      return 2.0 * std::numbers::pi;
    default:
      return 4.0 * std::numbers::pi;
  }
}

/// Simpson's rule on uniform samples; a trailing odd interval uses the 3/8 rule.
double simpson(std::span<const double> f, double h) {
  const std::size_t m = f.size() - 1;
  if (f.size() < 2) return 0.0;
  if (m == 1) return 0.5 * h * (f[0] + f[1]);
  std::size_t even_end = m % 2 == 0 ? m : m - 3;
  double s = 0.0;
  for (std::size_t i = 0; i + 2 <= even_end; i += 2) s += f[i] + 4.0 * f[i + 1] + f[i + 2];
  s *= h / 3.0;
  if (even_end != m) {
    const std::size_t i = even_end;
    s += 3.0 * h / 8.0 * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
  }
  return s;
}

/// Fourth-order first derivative on uniform nodes. `even_at_start` mirrors the
/// samples about the first node (radial profiles); otherwise one-sided stencils.
std::vector<double> first_derivative(std::span<const double> u, double h, bool even_at_start) {
  const std::size_t m = u.size();
  std::vector<double> d(m, 0.0);
  auto at = [&](long i) {
    if (i < 0) return even_at_start ? u[static_cast<std::size_t>(-i)] : 0.0;
    return u[static_cast<std::size_t>(i)];
  };
  for (std::size_t i = 0; i < m; ++i) {
    const long j = static_cast<long>(i);
    if (i + 2 < m && (i >= 2 || even_at_start)) {
      d[i] = (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2)) / (12.0 * h);
    } else if (i + 2 >= m) {
      // backward stencils
      if (i == m - 1) {
        d[i] = (25.0 * u[i] - 48.0 * u[i - 1] + 36.0 * u[i - 2] - 16.0 * u[i - 3] + 3.0 * u[i - 4]) /
               (12.0 * h);
      } else {
        d[i] = (3.0 * u[i + 1] + 10.0 * u[i] - 18.0 * u[i - 1] + 6.0 * u[i - 2] - u[i - 3]) / (12.0 * h);
      }
    } else if (i == 0) {
      d[i] = (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]) / (12.0 * h);
    } else {
      d[i] = (-3.0 * u[i - 1] - 10.0 * u[i] + 18.0 * u[i + 1] - 6.0 * u[i + 2] + u[i + 3]) / (12.0 * h);
    }
  }
  return d;
}

std::vector<double> uniform_nodes(double start, double step, std::size_t count) {
  std::vector<double> r(count);
  for (std::size_t i = 0; i < count; ++i) r[i] = start + step * static_cast<double>(i);
  return r;
}

/// Bisects a monotone predicate boundary: pred(lo) false, pred(hi) true.
template <class Pred>
void bisect(double& lo, double& hi, Pred&& pred, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return;
    (pred(mid) ? hi : lo) = mid;
  }
  throw SolverError("shooting: bisection did not converge within the iteration cap");
}

}  // namespace

double ProfileParams::potential(double r_or_x) const {
  if (mode == PotentialMode::quadratic) return k * r_or_x * r_or_x + gamma0;
  return k1 * r_or_x + gamma0;
}

ProfileParams quadratic_params(int n, double k, double gamma0) {
  if (n < 1 || n > 3) throw InvalidArgument("profile: n must be 1, 2 or 3");
  ProfileParams p;
  p.n = n;
  p.sigma = 4.0 / n;
  p.mode = PotentialMode::quadratic;
  p.k = k;
  p.gamma0 = gamma0;
  return p;
}

ProfileParams linear_params(double k1, double gamma0) {
  ProfileParams p;
  p.n = 1;
  p.sigma = 4.0;
  p.mode = PotentialMode::linear;
  p.k1 = k1;
  p.gamma0 = gamma0;
  p.lambda_dir = {1.0, 0.0, 0.0};
  return p;
}

RadialProfile::RadialProfile(ProfileParams params, ProfileKind kind, std::vector<double> nodes,
                             std::vector<double> values, double u_center, double support_radius)
    : params_(params),
      kind_(kind),
      nodes_(std::move(nodes)),
      values_(std::move(values)),
      u_center_(u_center),
      support_radius_(support_radius) {
  if (nodes_.size() != values_.size() || nodes_.size() < 5) {
    throw InvalidArgument("profile: need at least 5 nodes with matching values");
  }
  const double h = nodes_[1] - nodes_[0];
  if (!(h > 0.0)) throw InvalidArgument("profile: nodes must increase");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (std::abs(nodes_[i] - nodes_[i - 1] - h) > 1e-9 * h) {
      throw InvalidArgument("profile: nodes must be uniformly spaced");
    }
  }
  if (kind_ != ProfileKind::interval && nodes_.front() != 0.0) {
    throw InvalidArgument("profile: radial nodes must start at r = 0");
  }
}

double RadialProfile::interpolate(double s) const {
  const double h = nodes_[1] - nodes_[0];
  const double pos = (s - nodes_.front()) / h;
  const long last = static_cast<long>(nodes_.size()) - 1;
  long j = static_cast<long>(std::floor(pos));
  if (j >= last) return values_.back();
  // Radial profiles are even about r = 0, so index -1 mirrors index 1.
  const bool mirror = kind_ != ProfileKind::interval;
  long base = j - 1;
  if (base < 0 && !mirror) base = 0;
  if (base + 3 > last) base = last - 3;
  const double f = pos - static_cast<double>(base + 1);
  auto v = [&](long i) { return values_[static_cast<std::size_t>(i < 0 ? -i : i)]; };
  const double w0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
  const double w1 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
  const double w2 = -(f + 1.0) * f * (f - 2.0) / 2.0;
  const double w3 = (f + 1.0) * f * (f - 1.0) / 6.0;
  return w0 * v(base) + w1 * v(base + 1) + w2 * v(base + 2) + w3 * v(base + 3);
}

double RadialProfile::tail(double r) const {
  // Decaying solution of the linearised radial equation: r^{1-n/2} K_{n/2-1}(sqrt(gamma0) r).
  const double rc = nodes_.back();
  const double uc = values_.back();
  const double kappa = std::sqrt(params_.gamma0);
  switch (params_.n) {
    case 1:
      return uc * std::exp(-kappa * (r - rc));
    case 3:
      return uc * rc / r * std::exp(-kappa * (r - rc));
    default: {
      const double num = std::cyl_bessel_k(0.0, kappa * r);
      const double den = std::cyl_bessel_k(0.0, kappa * rc);
      return den > 0.0 ? uc * num / den : 0.0;
    }
  }
}

double RadialProfile::operator()(double s) const {
  switch (kind_) {
    case ProfileKind::ground_state:
      s = std::abs(s);
      return s > nodes_.back() ? tail(s) : interpolate(s);
    case ProfileKind::dirichlet_ball:
      s = std::abs(s);
      return s >= support_radius_ ? 0.0 : std::max(0.0, interpolate(s));
    case ProfileKind::interval:
      return std::abs(s) >= support_radius_ ? 0.0 : std::max(0.0, interpolate(s));
  }
  return 0.0;
}

double RadialProfile::at(std::span<const double> xi) const {
  if (kind_ == ProfileKind::interval) return (*this)(xi[0]);
  double r2 = 0.0;
  for (double c : xi) r2 += c * c;
  return (*this)(std::sqrt(r2));
}

double RadialProfile::peak() const { return *std::max_element(values_.begin(), values_.end()); }

double RadialProfile::half_width() const {
  const auto top = std::max_element(values_.begin(), values_.end());
  const double half = 0.5 * *top;
  const auto i_top = static_cast<std::size_t>(top - values_.begin());
  auto crossing = [&](long step) {
    long i = static_cast<long>(i_top);
    while (i + step >= 0 && i + step < static_cast<long>(values_.size()) &&
           values_[static_cast<std::size_t>(i + step)] > half) {
      i += step;
    }
    const long j = i + step;
    if (j < 0 || j >= static_cast<long>(values_.size())) return nodes_[static_cast<std::size_t>(i)];
    const double a = values_[static_cast<std::size_t>(i)];
    const double b = values_[static_cast<std::size_t>(j)];
    const double w = (a - half) / (a - b);
    return nodes_[static_cast<std::size_t>(i)] +
           w * (nodes_[static_cast<std::size_t>(j)] - nodes_[static_cast<std::size_t>(i)]);
  };
  if (kind_ == ProfileKind::interval) return 0.5 * (crossing(+1) - crossing(-1));
  return crossing(+1);
}

RadialProfile ground_state(int n, double tol, const ProfileOptions& opt) {
  check_tol(tol, "ground_state");
  const ProfileParams params = quadratic_params(n, 0.0, 1.0);
  const ProfileRhs rhs{params, true};
  const double rtol = tol / 100.0;
  const double atol = rtol * 1e-12;
  const double r0 = 1e-6;
  const double r_max = opt.max_radius;

  auto crosses = [&](double u0) {
    return shoot(rhs, radial_start(params, u0, r0), r0, r_max, rtol, atol, true).outcome ==
           Outcome::crossed_zero;
  };

  // Below the ground state trajectories turn back up; above they cross zero.
  double lo = 0.0;
  double hi = 0.0;
  double u = 0.05;
  for (int i = 0; i < opt.max_scan && u < 1e3; ++i, u *= 1.2) {
    if (crosses(u)) {
      hi = u;
      break;
    }
    lo = u;
  }
  if (hi == 0.0 || lo == 0.0) {
    throw SolverError("ground_state: shooting bracket not found scanning u(0) in [0.05, 1e3]");
  }
  bisect(lo, hi, crosses, opt.max_bisections);
  if (shoot(rhs, radial_start(params, lo, r0), r0, r_max, rtol, atol, true).outcome != Outcome::turned_up) {
    throw SolverError("ground_state: trajectory not resolved within max_radius");
  }

  const std::size_t count = static_cast<std::size_t>(std::ceil(r_max / opt.node_spacing)) + 1;
  const auto nodes = uniform_nodes(0.0, opt.node_spacing, count);
  std::vector<State> below{State{lo, 0.0}}, above{State{hi, 0.0}};
  shoot(rhs, radial_start(params, lo, r0), r0, r_max, rtol, atol, true, nodes, &below);
  shoot(rhs, radial_start(params, hi, r0), r0, r_max, rtol, atol, true, nodes, &above);

  // Past the core the nonlinear term dies out and u follows the decaying branch
  // of the linearised equation until the growing branch (seeded at round-off
  // level) takes over. Switch to the analytic tail where the log-derivative
  // mismatch between the two is smallest.
  const std::size_t limit = std::min(below.size(), above.size());
  std::vector<double> mid(limit), slope(limit);
  for (std::size_t i = 0; i < limit; ++i) {
    mid[i] = 0.5 * (below[i][0] + above[i][0]);
    slope[i] = 0.5 * (below[i][1] + above[i][1]);
  }
  std::size_t switch_at = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < limit; ++i) {
    if (!(mid[i] > 0.0) || mid[i] >= mid[i - 1]) break;
    if (mid[i] > 0.1 * lo) continue;
    const double mismatch = std::abs(slope[i] / mid[i] - decaying_log_derivative(n, nodes[i]));
    if (mismatch < best) {
      best = mismatch;
      switch_at = i;
    }
  }
  if (switch_at < 16) throw SolverError("ground_state: could not locate the decaying tail");
  std::vector<double> values(mid.begin(), mid.begin() + static_cast<long>(switch_at) + 1);
  std::vector<double> kept(nodes.begin(), nodes.begin() + static_cast<long>(switch_at) + 1);
  return RadialProfile(params, ProfileKind::ground_state, std::move(kept), std::move(values),
                       0.5 * (lo + hi), std::numeric_limits<double>::infinity());
}

namespace {

/// Shared driver for the two Dirichlet problems: scan the shooting parameter
/// upward until the first zero moves inside the domain, then bisect onto it.
struct DirichletShooting {
  ProfileRhs rhs;
  double t0;
  double t_end;
  double rtol;
  double atol;
  std::function<State(double)> start;
  std::vector<double> nodes;

  bool zero_inside(double p) const {
    const Shot s = shoot(rhs, start(p), t0, t_end, rtol, atol, false, nodes);
    return s.outcome == Outcome::crossed_zero;
  }

  double solve(double p_min, double p_max, double factor, const ProfileOptions& opt,
               const char* who) const {
    double prev = 0.0;
    double p = p_min;
    for (int i = 0; i < opt.max_scan && p <= p_max; ++i, p *= factor) {
      if (zero_inside(p)) {
        if (prev == 0.0) {
          std::ostringstream msg;
          msg << who << ": no positive interior solution found; the first zero already lies inside "
              << "the domain at the smallest scanned parameter " << p_min;
          throw SolverError(msg.str());
        }
        double lo = prev;
        double hi = p;
        bisect(lo, hi, [this](double q) { return zero_inside(q); }, opt.max_bisections);
        return lo;
      }
      prev = p;
    }
    std::ostringstream msg;
    msg << who << ": no positive interior solution found scanning the shooting parameter over ["
        << p_min << ", " << p_max << "]";
    throw SolverError(msg.str());
  }

  /// Samples the accepted trajectory; the boundary value is pinned to 0.
  std::vector<double> sample(double p, double first_value, const char* who) const {
    std::vector<State> states{State{first_value, 0.0}};
    shoot(rhs, start(p), t0, t_end, rtol, atol, false, nodes, &states);
    std::vector<double> values(states.size());
    std::transform(states.begin(), states.end(), values.begin(), [](const State& y) { return y[0]; });
    if (values.size() != nodes.size()) {
      throw SolverError(std::string(who) + ": trajectory stopped before the boundary");
    }
    const double peak = *std::max_element(values.begin(), values.end());
    const double edge = values.back();
    if (!(std::abs(edge) <= 1e3 * rtol * peak)) {
      std::ostringstream msg;
      msg << who << ": first zero cannot be driven to the boundary (|u| = " << edge
          << " there, peak " << peak << ")";
      throw SolverError(msg.str());
    }
    values.back() = 0.0;
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
      if (!(values[i] > 0.0)) throw SolverError(std::string(who) + ": interior value not positive");
    }
    return values;
  }
};

}  // namespace

RadialProfile dirichlet_profile(int n, double k, double gamma0, double ball_radius, double tol,
                                const ProfileOptions& opt) {
  check_tol(tol, "dirichlet_profile");
  if (!(ball_radius > 0.0)) throw InvalidArgument("dirichlet_profile: ball_radius must be positive");
  if (k > 0.0) throw InvalidArgument("dirichlet_profile: k must be <= 0");
  const ProfileParams params = quadratic_params(n, k, gamma0);
  const double rtol = tol / 100.0;
  const double r0 = std::min(1e-6, 1e-6 * ball_radius);
  const auto intervals =
      std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(ball_radius / opt.node_spacing)));
  auto nodes = uniform_nodes(0.0, ball_radius / static_cast<double>(intervals), intervals + 1);
  nodes.back() = ball_radius;
  DirichletShooting shooting{ProfileRhs{params, true}, r0, ball_radius, rtol, 1e-30,
                             [&params, r0](double u0) { return radial_start(params, u0, r0); },
                             nodes};
  const double u0 = shooting.solve(opt.scan_start.value_or(1e-4), 1e4, 1.1, opt, "dirichlet_profile");
  auto values = shooting.sample(u0, u0, "dirichlet_profile");
  return RadialProfile(params, ProfileKind::dirichlet_ball, std::move(nodes), std::move(values), u0,
                       ball_radius);
}

RadialProfile stark_profile_1d(double k1, double gamma0, double half_interval, double tol,
                               const ProfileOptions& opt) {
  check_tol(tol, "stark_profile_1d");
  if (!(half_interval > 0.0)) throw InvalidArgument("stark_profile_1d: half_interval must be positive");
  const ProfileParams params = linear_params(k1, gamma0);
  const double rtol = tol / 100.0;
  const double left = -half_interval;
  auto intervals = static_cast<std::size_t>(std::ceil(2.0 * half_interval / opt.node_spacing));
  intervals = std::max<std::size_t>(16, intervals + intervals % 2);
  auto nodes = uniform_nodes(left, 2.0 * half_interval / static_cast<double>(intervals), intervals + 1);
  nodes.back() = half_interval;
  DirichletShooting shooting{ProfileRhs{params, false}, left, half_interval, rtol, 1e-300,
                             [](double slope) { return State{0.0, slope}; }, nodes};
  const double slope = shooting.solve(opt.scan_start.value_or(1e-14), 1e4, 1.2, opt, "stark_profile_1d");
  auto values = shooting.sample(slope, 0.0, "stark_profile_1d");
  return RadialProfile(params, ProfileKind::interval, std::move(nodes), std::move(values), slope,
                       half_interval);
}

double profile_residual(const RadialProfile& profile) {
  const auto u = profile.values();
  const auto x = profile.nodes();
  if (u.size() < 5) throw InvalidArgument("profile_residual: need at least 5 nodes");
  const auto& p = profile.params();
  const double h = x[1] - x[0];
  const bool radial = profile.is_radial();
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < u.size(); ++i) {
    const double d2 = (-u[i - 2] + 16.0 * u[i - 1] - 30.0 * u[i] + 16.0 * u[i + 1] - u[i + 2]) / (12.0 * h * h);
    const double d1 = (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) / (12.0 * h);
    const double damping = radial && p.n > 1 ? (p.n - 1) / x[i] * d1 : 0.0;
    const double defect = d2 + damping + focusing(u[i], p.n) - p.potential(x[i]) * u[i];
    worst = std::max(worst, std::abs(defect));
  }
  return worst;
}

ProfileNorms profile_norms(const RadialProfile& profile) {
  const auto& p = profile.params();
  std::vector<double> x(profile.nodes().begin(), profile.nodes().end());
  std::vector<double> u(profile.values().begin(), profile.values().end());
  const double h = x[1] - x[0];
  if (profile.kind() == ProfileKind::ground_state) {
    // Extend through the analytic tail until it is negligible.
    const double r_end = x.back() + 40.0 / std::sqrt(p.gamma0);
    while (x.back() < r_end) {
      x.push_back(x.back() + h);
      u.push_back(profile(x.back()));
    }
  }
  const bool radial = profile.is_radial();
  const auto du = first_derivative(u, h, radial);
  const std::size_t m = u.size();
  std::vector<double> mass(m), grad(m), power(m), moment(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = radial ? std::pow(x[i], p.n - 1) : 1.0;
    mass[i] = w * u[i] * u[i];
    grad[i] = w * du[i] * du[i];
    power[i] = w * std::pow(std::abs(u[i]), p.sigma + 2.0);
    moment[i] = mass[i] * x[i] * x[i];
  }
  const double measure = radial ? surface_measure(p.n) : 1.0;
  ProfileNorms out{};
  out.mass = measure * simpson(mass, h);
  out.grad_sq = measure * simpson(grad, h);
  out.power = measure * simpson(power, h);
  out.second_moment = measure * simpson(moment, h);
  out.energy = out.grad_sq - 2.0 / (p.sigma + 2.0) * out.power;
  return out;
}

void write_profile(const std::filesystem::path& csv_path, const RadialProfile& profile) {
  {
    CsvWriter csv(csv_path, {"r", "u"});
    for (std::size_t i = 0; i < profile.nodes().size(); ++i) {
      csv.row({profile.nodes()[i], profile.values()[i]});
    }
  }
  const auto& p = profile.params();
  nlohmann::json meta;
  meta["params"] = {{"n", p.n},
                    {"sigma", p.sigma},
                    {"mode", p.mode == PotentialMode::quadratic ? "quadratic" : "linear"},
                    {"k", p.k},
                    {"gamma0", p.gamma0},
                    {"k1", p.k1},
                    {"lambda_dir", std::vector<double>(p.lambda_dir.begin(), p.lambda_dir.begin() + p.n)}};
  const char* kind = profile.kind() == ProfileKind::ground_state     ? "ground_state"
                     : profile.kind() == ProfileKind::dirichlet_ball ? "dirichlet_ball"
                                                                     : "interval";
  meta["kind"] = kind;
  meta["u_center"] = profile.u_center();
  if (std::isfinite(profile.support_radius())) {
    meta["support_radius"] = profile.support_radius();
  } else {
    meta["support_radius"] = nullptr;
  }
  meta["residual"] = profile_residual(profile);
  auto sidecar = csv_path;
  sidecar.replace_extension(".json");
  std::ofstream os(sidecar);
  if (!os) throw InvalidArgument("cannot open " + sidecar.string());
  os << meta.dump(2) << '\n';
}

}  // namespace hydronls
