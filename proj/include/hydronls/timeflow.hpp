#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace hydronls {

/// Coefficients of the second-moment quadratic M(t) = 4 H t^2 + M0p t + M0.
class VirialCoefficients {
 public:
  VirialCoefficients(double H, double M0, double M0p, double N);

  double H() const { return H_; }
  double M0() const { return M0_; }
  double M0p() const { return M0p_; }
  double N() const { return N_; }
  /// K = 16 H M0 - M0p^2.
  double K() const;
  /// k = K / (16 M0^2).
  double k() const;

  double M(double t) const;
  double M_prime(double t) const;
  /// Smallest strictly positive root of M, or +inf.
  double first_positive_root() const;

 private:
  double H_, M0_, M0p_, N_;
};

VirialCoefficients virial_coefficients(double H, double M0, double M0p, double N);

/// (8Ht + M0p) / (2 M(t)). Throws InvalidArgument where M(t) <= 0.
double a_closed_form(const VirialCoefficients& vc, double t);

struct ATrajectory {
  std::vector<double> t;
  std::vector<double> a;
  std::vector<double> E;  ///< exp(-2 int_0^t a)
  bool singular = false;
  double t_stop = 0.0;    ///< t_end, or the time at which |a| exceeded 1/tol
};

/// Integrates a' = 4k E^2 - a^2, E' = -2aE from a(0) = a0, E(0) = 1.
/// Every time in `output_times` inside the integration range is hit exactly.
ATrajectory integrate_a_ode(double a0, double k, double t_end, double tol,
                            std::span<const double> output_times = {});

enum class Regime { decay, blowup_i, blowup_ii, blowup_iii, blowup_k0, global_no_collapse };

std::string to_string(Regime r);

struct BlowupReport {
  Regime regime = Regime::global_no_collapse;
  std::optional<double> T;
  std::optional<double> paper_T;
  double amplitude_exponent = 0.0;
  double gradient_exponent = 0.0;
  double K = 0.0;
  double k = 0.0;
  /// paper_T present and differing from T by more than 1e-12 relative.
  bool paper_T_differs = false;
};

/// K counts as zero when |K| <= k_zero_tol * max(16 |H| M0, M0p^2). Coefficients measured on a
/// grid need a looser tolerance than the exact default.
BlowupReport classify_blowup(const VirialCoefficients& vc, int n_dims, double k_zero_tol = 1e-12);
nlohmann::json to_json(const BlowupReport& report);

/// gamma0 M0 int_0^t dtau / M(tau), adaptive Simpson to 1e-10 absolute.
double phase_integral(const VirialCoefficients& vc, double gamma0, double t);
/// Same quantity from the antiderivative (arctan / log / rational by the sign of K).
double phase_integral_closed_form(const VirialCoefficients& vc, double gamma0, double t);

enum class FlowMode { profile, general };

/// Time dependence of a self-similar solution: scale s(t), chirp a(t), tilt b(t),
/// phase gamma(t) and drift d(t). Immutable.
class TimeFlow {
 public:
  /// a' + a^2 = 4k (M0/M)^2 with a(0) = a0; normalized quadratic
  /// m(t) = (4k + a0^2) t^2 + 2 a0 t + 1, s = sqrt(m).
  static TimeFlow profile(double a0, double k, double gamma0, int n_dims);
  static TimeFlow from_virial(const VirialCoefficients& vc, double gamma0, int n_dims);
  static TimeFlow general(double a0, double b0, double k1, double gamma0,
                          std::vector<double> lambda);

  FlowMode mode() const { return mode_; }
  double a0() const { return a0_; }
  double b0() const { return b0_; }
  double k_or_k1() const { return k_; }
  double gamma0() const { return gamma0_; }
  const std::vector<double>& lambda() const { return lambda_; }
  int n_dims() const { return static_cast<int>(lambda_.size()); }
  double valid_until() const { return valid_until_; }

  double a(double t) const;
  double b(double t) const;
  double scale(double t) const;
  /// Phase by adaptive quadrature of gamma'(t).
  double gamma(double t) const;
  /// Phase from the closed antiderivative.
  double gamma_closed_form(double t) const;
  double gamma_rate(double t) const;
  std::vector<double> drift(double t) const;

 private:
  TimeFlow() = default;
  void check_time(double t) const;
  double m(double t) const;

  FlowMode mode_ = FlowMode::profile;
  double a0_ = 0.0;
  double b0_ = 0.0;
  double k_ = 0.0;
  double gamma0_ = 0.0;
  std::vector<double> lambda_;
  double valid_until_ = std::numeric_limits<double>::infinity();
};

TimeFlow general_timeflow(double a0, double b0, double k1, double gamma0,
                          std::vector<double> lambda);

/// CSV columns t,a,b,gamma,scale,drift_1..drift_n.
void write_timeflow_csv(const std::filesystem::path& path, const TimeFlow& flow,
                        std::span<const double> times);

/// Q_Lambda(t) = Pl t + Q0.
double q_lambda(double Pl, double Q0, double t);

/// Chirp and tilt from the moment closure F(t) a' = -a F' + A with
/// F = A t^2 + B t + C and b = (Pl - a Q_Lambda) / (N |Lambda|^2).
class FunctionalFlow {
 public:
  FunctionalFlow(double N, double H, double M0, double M0p, double Q0, double Pl,
                 double lambda_norm, double a0);

  double A() const { return A_; }
  double B() const { return B_; }
  double C() const { return C_; }
  /// Coefficients as printed in the source formulas, kept for comparison only.
  double A_literal() const { return A_lit_; }
  double B_literal() const { return B_lit_; }
  bool literal_coefficients_agree() const;

  double F(double t) const;
  double a(double t) const;
  double b(double t) const;
  /// Printed closed forms built on the literal coefficients.
  double a_literal(double t) const;
  double b_literal(double t) const;
  /// a(t) by direct integration of F a' = -a F' + A (tolerance 1e-12).
  double a_reintegrated(double t) const;
  double b_reintegrated(double t) const;

 private:
  double N_, H_, M0_, M0p_, Q0_, Pl_, lambda_sq_, a0_;
  double A_, B_, C_, A_lit_, B_lit_;
};

FunctionalFlow functional_timeflow(double N, double H, double M0, double M0p, double Q0,
                                   double Pl, double lambda_norm, double a0);

}  // namespace hydronls
