#include "hydronls/timeflow.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numeric>

#include "hydronls/error.hpp"
#include "hydronls/quadrature.hpp"
#include "hydronls/text_io.hpp"

namespace hydronls {
namespace {

namespace odeint = boost::numeric::odeint;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPhaseTol = 1e-10;

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

/// Real roots of a t^2 + b t + c in ascending order (cancellation-free).
/// `disc` may be supplied when b^2 - 4ac is known in closed form. A computed discriminant
/// within 1e-12 of zero, relative to max(b^2, |4ac|), counts as a double root.
std::vector<double> quadratic_roots(double a, double b, double c,
                                    std::optional<double> known_disc = std::nullopt) {
  if (a == 0.0) {
    if (b == 0.0) return {};
    return {-c / b};
  }
  double disc = known_disc.value_or(std::fma(b, b, -4.0 * a * c));
  if (!known_disc && std::abs(disc) <= 1e-12 * std::max(b * b, std::abs(4.0 * a * c))) disc = 0.0;
  if (disc < 0.0) return {};
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + std::copysign(sq, b));
  std::vector<double> roots;
  if (q == 0.0) {
    roots = {0.0, 0.0};
  } else {
    roots = {q / a, c / q};
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

double smallest_positive_root(double a, double b, double c,
                              std::optional<double> known_disc = std::nullopt) {
  for (double r : quadratic_roots(a, b, c, known_disc)) {
    if (r > 0.0) return r;
  }
  return kInf;
}

/// int_0^t dtau / (a tau^2 + b tau + c), c > 0, for t below the first positive root.
double inverse_quadratic_integral(double a, double b, double c, double t) {
  if (t == 0.0) return 0.0;
  if (a == 0.0) {
    if (b == 0.0) return t / c;
    return std::log1p(b * t / c) / b;
  }
  const double disc = std::fma(b, b, -4.0 * a * c);
  const double scale = std::max(b * b, std::abs(4.0 * a * c));
  if (std::abs(disc) <= 1e-14 * scale) {
    const double r = -b / (2.0 * a);
    return t * r / (c * (r - t));
  }
  if (disc < 0.0) {
    const double q = std::sqrt(-disc);
    return 2.0 / q * (std::atan((2.0 * a * t + b) / q) - std::atan(b / q));
  }
  const auto roots = quadratic_roots(a, b, c);
  const double r1 = roots[0];
  const double r2 = roots[1];
  return (std::log(std::abs(1.0 - t / r1)) - std::log(std::abs(1.0 - t / r2))) / (a * (r1 - r2));
}

}  // namespace

VirialCoefficients::VirialCoefficients(double H, double M0, double M0p, double N)
    : H_(H), M0_(M0), M0p_(M0p), N_(N) {
  if (!finite_all({H, M0, M0p, N})) {
    throw InvalidArgument("virial_coefficients: non-finite input");
  }
  if (!(M0 > 0.0)) throw InvalidArgument("virial_coefficients: M0 must be positive");
  if (!(N > 0.0)) throw InvalidArgument("virial_coefficients: N must be positive");
}

double VirialCoefficients::K() const { return std::fma(16.0 * H_, M0_, -M0p_ * M0p_); }

double VirialCoefficients::k() const { return K() / (16.0 * M0_ * M0_); }

double VirialCoefficients::M(double t) const { return (4.0 * H_ * t + M0p_) * t + M0_; }

double VirialCoefficients::M_prime(double t) const { return 8.0 * H_ * t + M0p_; }

double VirialCoefficients::first_positive_root() const {
  return smallest_positive_root(4.0 * H_, M0p_, M0_);
}

VirialCoefficients virial_coefficients(double H, double M0, double M0p, double N) {
  return VirialCoefficients(H, M0, M0p, N);
}

double a_closed_form(const VirialCoefficients& vc, double t) {
  const double m = vc.M(t);
  if (!(m > 0.0)) throw InvalidArgument("a_closed_form: M(t) is not positive at this time");
  return vc.M_prime(t) / (2.0 * m);
}

ATrajectory integrate_a_ode(double a0, double k, double t_end, double tol,
                            std::span<const double> output_times) {
  if (!finite_all({a0, k, t_end})) throw InvalidArgument("integrate_a_ode: non-finite input");
  if (!(tol >= 1e-12 && tol <= 1e-6)) {
    throw InvalidArgument("integrate_a_ode: tol must lie in [1e-12, 1e-6]");
  }
  if (!(t_end > 0.0)) throw InvalidArgument("integrate_a_ode: t_end must be positive");
  if (!std::is_sorted(output_times.begin(), output_times.end())) {
    throw InvalidArgument("integrate_a_ode: output times must be sorted");
  }

  using State = std::array<double, 2>;
  const auto rhs = [k](const State& y, State& dy, double) {
    dy[0] = 4.0 * k * y[1] * y[1] - y[0] * y[0];
    dy[1] = -2.0 * y[0] * y[1];
  };
  const double rtol = 1e-2 * tol;
  auto stepper = odeint::make_controlled(1e-3 * rtol, rtol, odeint::runge_kutta_dopri5<State>());

  ATrajectory out;
  State y{a0, 1.0};
  double t = 0.0;
  out.t.push_back(t);
  out.a.push_back(y[0]);
  out.E.push_back(y[1]);
  std::size_t next = 0;
  while (next < output_times.size() && output_times[next] <= 0.0) ++next;
  double dt = std::min(1e-3, 1e-2 * t_end);
  if (std::abs(a0) > 0.0) dt = std::min(dt, 1e-2 / std::abs(a0));
  const double a_limit = 1.0 / tol;
  for (long step = 0; step < 10'000'000; ++step) {
    const double target =
        next < output_times.size() ? std::min(output_times[next], t_end) : t_end;
    const bool clipped = target - t <= dt;
    double h = clipped ? target - t : dt;
    if (stepper.try_step(rhs, y, t, h) == odeint::fail) {
      dt = h;
      if (dt < 1e-300) break;
      continue;
    }
    if (clipped) {
      t = target;
      dt = std::max(dt, h);
    } else {
      dt = h;
    }
    if (next < output_times.size() && t == output_times[next]) ++next;
    out.t.push_back(t);
    out.a.push_back(y[0]);
    out.E.push_back(y[1]);
    if (!std::isfinite(y[0]) || std::abs(y[0]) > a_limit) {
      out.singular = true;
      out.t_stop = t;
      return out;
    }
    if (t >= t_end) {
      out.t_stop = t_end;
      return out;
    }
  }
  throw SolverError("integrate_a_ode: step budget exhausted");
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::decay:
      return "decay";
    case Regime::blowup_i:
      return "blowup_i";
    case Regime::blowup_ii:
      return "blowup_ii";
    case Regime::blowup_iii:
      return "blowup_iii";
    case Regime::blowup_k0:
      return "blowup_k0";
    case Regime::global_no_collapse:
      return "global_no_collapse";
  }
  return "unknown";
}

BlowupReport classify_blowup(const VirialCoefficients& vc, int n_dims, double k_zero_tol) {
  if (n_dims < 1 || n_dims > 3) throw InvalidArgument("classify_blowup: n must be 1, 2 or 3");
  if (!(k_zero_tol >= 0.0)) throw InvalidArgument("classify_blowup: k_zero_tol must be non-negative");
  const double H = vc.H();
  const double M0 = vc.M0();
  const double M0p = vc.M0p();
  BlowupReport rep;
  rep.K = vc.K();
  rep.k = vc.k();
  const double scale = std::max(16.0 * std::abs(H) * M0, M0p * M0p);
  const bool k_zero = std::abs(rep.K) <= k_zero_tol * scale;
  const double n = n_dims;

  const auto collapse = [&](Regime regime, double T, std::optional<double> paper_T,
                            bool k_is_zero) {
    rep.regime = regime;
    rep.T = T;
    rep.paper_T = paper_T;
    rep.amplitude_exponent = k_is_zero ? n / 2.0 : n / 4.0;
    rep.gradient_exponent = k_is_zero ? 2.0 : 1.0;
  };

  if (H == 0.0 && M0p == 0.0) {
    rep.regime = Regime::global_no_collapse;
  } else if (k_zero) {
    // Double root (H > 0) or a linear M with vanishing slope handled above.
    const double T = -M0p / (8.0 * H);
    if (H > 0.0 && T > 0.0) {
      collapse(Regime::blowup_k0, T, -M0p / (2.0 * H), true);
    } else {
      rep.regime = Regime::global_no_collapse;
    }
  } else if (rep.K > 0.0) {
    rep.regime = Regime::decay;
  } else {
    const double T = vc.first_positive_root();
    const double sq = std::sqrt(-rep.K);
    if (!std::isfinite(T)) {
      rep.regime = Regime::global_no_collapse;
    } else if (H == 0.0) {
      collapse(Regime::blowup_i, T, -M0 / M0p, false);
    } else if (H > 0.0) {
      collapse(Regime::blowup_ii, T, (-M0p - sq) / (2.0 * H), false);
    } else {
      collapse(Regime::blowup_iii, T, (-M0p + sq) / (2.0 * H), false);
    }
  }
  if (rep.T && rep.paper_T) {
    rep.paper_T_differs = std::abs(*rep.T - *rep.paper_T) > 1e-12 * std::abs(*rep.T);
  }
  return rep;
}

nlohmann::json to_json(const BlowupReport& report) {
  nlohmann::json j;
  j["regime"] = to_string(report.regime);
  j["T"] = report.T ? nlohmann::json(*report.T) : nlohmann::json(nullptr);
  j["paper_T"] = report.paper_T ? nlohmann::json(*report.paper_T) : nlohmann::json(nullptr);
  j["amplitude_exponent"] = report.amplitude_exponent;
  j["gradient_exponent"] = report.gradient_exponent;
  j["K"] = report.K;
  j["k"] = report.k;
  j["paper_T_differs"] = report.paper_T_differs;
  return j;
}

namespace {

void check_phase_time(const VirialCoefficients& vc, double t, const char* who) {
  if (!std::isfinite(t) || t < 0.0) {
    throw InvalidArgument(std::string(who) + ": t must be finite and nonnegative");
  }
  if (t >= vc.first_positive_root()) {
    throw InvalidArgument(std::string(who) + ": t is at or beyond the first root of M");
  }
}

}  // namespace

double phase_integral(const VirialCoefficients& vc, double gamma0, double t) {
  check_phase_time(vc, t, "phase_integral");
  if (gamma0 == 0.0) return 0.0;
  const double c = gamma0 * vc.M0();
  return adaptive_simpson([&](double tau) { return c / vc.M(tau); }, 0.0, t, kPhaseTol);
}

double phase_integral_closed_form(const VirialCoefficients& vc, double gamma0, double t) {
  check_phase_time(vc, t, "phase_integral_closed_form");
  return gamma0 * vc.M0() * inverse_quadratic_integral(4.0 * vc.H(), vc.M0p(), vc.M0(), t);
}

TimeFlow TimeFlow::profile(double a0, double k, double gamma0, int n_dims) {
  if (!finite_all({a0, k, gamma0})) throw InvalidArgument("TimeFlow: non-finite parameter");
  if (n_dims < 1 || n_dims > 3) throw InvalidArgument("TimeFlow: n must be 1, 2 or 3");
  TimeFlow f;
  f.mode_ = FlowMode::profile;
  f.a0_ = a0;
  f.k_ = k;
  f.gamma0_ = gamma0;
  f.lambda_.assign(static_cast<std::size_t>(n_dims), 0.0);
  // The discriminant of m is exactly -16k.
  f.valid_until_ = smallest_positive_root(4.0 * k + a0 * a0, 2.0 * a0, 1.0, -16.0 * k);
  return f;
}

TimeFlow TimeFlow::from_virial(const VirialCoefficients& vc, double gamma0, int n_dims) {
  TimeFlow f = profile(vc.M0p() / (2.0 * vc.M0()), vc.k(), gamma0, n_dims);
  // The root of M itself is authoritative; the normalized quadratic may round differently.
  f.valid_until_ = vc.first_positive_root();
  return f;
}

TimeFlow TimeFlow::general(double a0, double b0, double k1, double gamma0,
                           std::vector<double> lambda) {
  if (!finite_all({a0, b0, k1, gamma0})) throw InvalidArgument("TimeFlow: non-finite parameter");
  if (lambda.empty() || lambda.size() > 3) {
    throw InvalidArgument("TimeFlow: lambda must have 1 to 3 components");
  }
  for (double l : lambda) {
    if (!std::isfinite(l)) throw InvalidArgument("TimeFlow: non-finite lambda");
  }
  TimeFlow f;
  f.mode_ = FlowMode::general;
  f.a0_ = a0;
  f.b0_ = b0;
  f.k_ = k1;
  f.gamma0_ = gamma0;
  f.lambda_ = std::move(lambda);
  f.valid_until_ = a0 < 0.0 ? -1.0 / a0 : kInf;
  return f;
}

TimeFlow general_timeflow(double a0, double b0, double k1, double gamma0,
                          std::vector<double> lambda) {
  return TimeFlow::general(a0, b0, k1, gamma0, std::move(lambda));
}

void TimeFlow::check_time(double t) const {
  if (!std::isfinite(t) || t < 0.0) throw InvalidArgument("TimeFlow: t must be finite and >= 0");
  if (t >= valid_until_) throw InvalidArgument("TimeFlow: evaluation beyond valid_until");
}

double TimeFlow::m(double t) const {
  // (4k + a0^2) t^2 + 2 a0 t + 1, written without cancellation near a double root.
  const double s = 1.0 + a0_ * t;
  if (mode_ == FlowMode::profile) return s * s + 4.0 * k_ * t * t;
  return s * s;
}

double TimeFlow::a(double t) const {
  check_time(t);
  if (mode_ == FlowMode::profile) return (a0_ * (1.0 + a0_ * t) + 4.0 * k_ * t) / m(t);
  return a0_ / (1.0 + a0_ * t);
}

double TimeFlow::b(double t) const {
  check_time(t);
  if (mode_ == FlowMode::profile) return 0.0;
  const double s = 1.0 + a0_ * t;
  return b0_ / s + 2.0 * k_ * t / (s * s);
}

double TimeFlow::scale(double t) const {
  check_time(t);
  if (mode_ == FlowMode::profile) return std::sqrt(m(t));
  return 1.0 + a0_ * t;
}

double TimeFlow::gamma_rate(double t) const {
  check_time(t);
  if (mode_ == FlowMode::profile) return gamma0_ / m(t);
  const double s = 1.0 + a0_ * t;
  const double tau = t / s;
  const double lam2 = std::inner_product(lambda_.begin(), lambda_.end(), lambda_.begin(), 0.0);
  const double inner =
      2.0 * k_ * k_ * tau * tau + 2.0 * k_ * b0_ * tau + 0.25 * b0_ * b0_;
  return (gamma0_ - lam2 * inner) / (s * s);
}

double TimeFlow::gamma(double t) const {
  check_time(t);
  return adaptive_simpson([this](double tau) { return gamma_rate(tau); }, 0.0, t, kPhaseTol);
}

double TimeFlow::gamma_closed_form(double t) const {
  check_time(t);
  if (mode_ == FlowMode::profile) {
    return gamma0_ * inverse_quadratic_integral(4.0 * k_ + a0_ * a0_, 2.0 * a0_, 1.0, t);
  }
  const double tau = t / (1.0 + a0_ * t);
  const double lam2 = std::inner_product(lambda_.begin(), lambda_.end(), lambda_.begin(), 0.0);
  const double poly = ((2.0 / 3.0) * k_ * k_ * tau + k_ * b0_) * tau * tau + 0.25 * b0_ * b0_ * tau;
  return gamma0_ * tau - lam2 * poly;
}

std::vector<double> TimeFlow::drift(double t) const {
  check_time(t);
  std::vector<double> d(lambda_.size(), 0.0);
  if (mode_ == FlowMode::profile) return d;
  const double tau = t / (1.0 + a0_ * t);
  const double w = b0_ * tau + k_ * tau * tau;
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = lambda_[i] * w;
  return d;
}

void write_timeflow_csv(const std::filesystem::path& path, const TimeFlow& flow,
                        std::span<const double> times) {
  std::vector<std::string> cols{"t", "a", "b", "gamma", "scale"};
  for (int i = 1; i <= flow.n_dims(); ++i) cols.push_back("drift_" + std::to_string(i));
  CsvWriter csv(path, cols);
  std::vector<double> row;
  for (double t : times) {
    row = {t, flow.a(t), flow.b(t), flow.gamma(t), flow.scale(t)};
    for (double d : flow.drift(t)) row.push_back(d);
    csv.row(std::span<const double>(row));
  }
}

double q_lambda(double Pl, double Q0, double t) { return Pl * t + Q0; }

FunctionalFlow::FunctionalFlow(double N, double H, double M0, double M0p, double Q0, double Pl,
                               double lambda_norm, double a0)
    : N_(N), H_(H), M0_(M0), M0p_(M0p), Q0_(Q0), Pl_(Pl), lambda_sq_(lambda_norm * lambda_norm),
      a0_(a0) {
  if (!finite_all({N, H, M0, M0p, Q0, Pl, lambda_norm, a0})) {
    throw InvalidArgument("functional_timeflow: non-finite input");
  }
  if (!(N > 0.0) || !(M0 > 0.0)) {
    throw InvalidArgument("functional_timeflow: N and M0 must be positive");
  }
  if (!(lambda_norm > 0.0)) throw InvalidArgument("functional_timeflow: |Lambda| must be positive");
  const double nl = N * lambda_sq_;
  A_ = 4.0 * H * nl - Pl * Pl;
  B_ = M0p * nl - 2.0 * Pl * Q0;
  C_ = M0 * nl - Q0 * Q0;
  A_lit_ = 8.0 * H * nl - Pl * Pl;
  B_lit_ = M0p * H * nl - 2.0 * Pl * Q0;
  if (C_ < 0.0) {
    throw InvalidArgument("functional_timeflow: C < 0 violates the Hoelder bound Q0^2 <= M0 N |Lambda|^2");
  }
}

bool FunctionalFlow::literal_coefficients_agree() const {
  const auto close = [](double x, double y) {
    return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
  };
  return close(A_, A_lit_) && close(B_, B_lit_);
}

double FunctionalFlow::F(double t) const { return (A_ * t + B_) * t + C_; }

double FunctionalFlow::a(double t) const {
  const double f = F(t);
  if (!(f > 0.0)) throw InvalidArgument("functional_timeflow: F(t) is not positive at this time");
  return (A_ * t + a0_ * C_) / f;
}

double FunctionalFlow::b(double t) const {
  return (Pl_ - a(t) * q_lambda(Pl_, Q0_, t)) / (N_ * lambda_sq_);
}

double FunctionalFlow::a_literal(double t) const {
  const double f = (A_lit_ * t + B_lit_) * t + C_;
  if (f == 0.0) throw InvalidArgument("functional_timeflow: literal F vanishes at this time");
  return C_ * t / f + a0_;
}

double FunctionalFlow::b_literal(double t) const {
  const double f = (A_lit_ * t + B_lit_) * t + C_;
  if (f == 0.0) throw InvalidArgument("functional_timeflow: literal F vanishes at this time");
  const double num = Pl_ * (A_lit_ - C_) * t * t + (Pl_ * (B_lit_ - a0_) - C_ * Q0_) * t +
                     (Pl_ * C_ - a0_ * Q0_);
  return num / (f * N_ * lambda_sq_);
}

double FunctionalFlow::a_reintegrated(double t) const {
  if (!std::isfinite(t) || t < 0.0) {
    throw InvalidArgument("functional_timeflow: t must be finite and >= 0");
  }
  // Singularities of the ODE are the zeros of F; refuse to integrate across one.
  for (double r : quadratic_roots(A_, B_, C_)) {
    if (r >= 0.0 && r <= t) {
      throw InvalidArgument("functional_timeflow: F vanishes on [0, t]");
    }
  }
  if (t == 0.0) return a0_;
  std::array<double, 1> y{a0_};
  const auto rhs = [this](const std::array<double, 1>& s, std::array<double, 1>& ds, double tt) {
    const double f = F(tt);
    ds[0] = (-s[0] * (2.0 * A_ * tt + B_) + A_) / f;
  };
  odeint::integrate_adaptive(
      odeint::make_controlled(1e-14, 1e-13, odeint::runge_kutta_dopri5<std::array<double, 1>>()),
      rhs, y, 0.0, t, std::min(1e-3, t));
  if (!std::isfinite(y[0])) throw SolverError("functional_timeflow: re-integration diverged");
  return y[0];
}

double FunctionalFlow::b_reintegrated(double t) const {
  return (Pl_ - a_reintegrated(t) * q_lambda(Pl_, Q0_, t)) / (N_ * lambda_sq_);
}

FunctionalFlow functional_timeflow(double N, double H, double M0, double M0p, double Q0,
                                   double Pl, double lambda_norm, double a0) {
  return FunctionalFlow(N, H, M0, M0p, Q0, Pl, lambda_norm, a0);
}

}  // namespace hydronls
