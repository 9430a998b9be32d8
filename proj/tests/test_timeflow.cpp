#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "hydronls/error.hpp"
#include "hydronls/timeflow.hpp"

using namespace hydronls;

TEST_CASE("virial coefficients") {
  const auto a = virial_coefficients(1.0, 1.0, 0.0, 1.0);
  CHECK(a.K() == 16.0);
  CHECK(a.k() == 1.0);
  const auto b = virial_coefficients(0.0, 2.0, -1.0, 1.0);
  CHECK(b.K() == -1.0);
  CHECK(b.k() == -1.0 / 64.0);
  const auto c = virial_coefficients(0.0, 1.0, 0.0, 1.0);
  CHECK(c.K() == 0.0);
  CHECK(c.k() == 0.0);
  for (double t : {0.0, 1.0, 100.0}) CHECK(c.M(t) == 1.0);
  CHECK_THROWS_AS(virial_coefficients(0.0, 0.0, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(virial_coefficients(0.0, 1.0, 0.0, -1.0), InvalidArgument);
}

TEST_CASE("second difference of M is 8H") {
  const auto vc = virial_coefficients(0.37, 2.0, -0.4, 1.0);
  const double h = 1e-2;
  for (double t = 0.1; t < 2.0; t += 0.1) {
    const double d2 = (vc.M(t + h) - 2.0 * vc.M(t) + vc.M(t - h)) / (h * h);
    CHECK(d2 == doctest::Approx(8.0 * 0.37).epsilon(1e-9));
  }
}

TEST_CASE("a closed form examples") {
  const auto vc = virial_coefficients(1.0, 1.0, 0.0, 1.0);
  CHECK(a_closed_form(vc, 1.0) == doctest::Approx(0.8));
  const auto v2 = virial_coefficients(0.3, 1.5, -0.7, 1.0);
  CHECK(a_closed_form(v2, 0.0) == doctest::Approx(-0.7 / 3.0));
  // H = 0, k = 0 branch: a = 1/(t + 1/a0).
  const auto v3 = virial_coefficients(0.0, 1.0, 0.0, 1.0);
  CHECK(a_closed_form(v3, 5.0) == 0.0);
  const auto v4 = virial_coefficients(0.25, 1.0, 2.0, 1.0);  // K = 0
  CHECK(v4.K() == 0.0);
  const double a0 = 2.0 / 2.0;
  for (double t : {0.0, 0.5, 3.0}) CHECK(a_closed_form(v4, t) == doctest::Approx(1.0 / (t + 1.0 / a0)));
  // At the root of M.
  const auto v5 = virial_coefficients(0.0, 2.0, -1.0, 1.0);
  CHECK_THROWS_AS(a_closed_form(v5, 2.0), InvalidArgument);
}

TEST_CASE("closed form satisfies the scale ODE") {
  const auto vc = virial_coefficients(-0.3, 1.2, 0.4, 1.0);
  const double T = vc.first_positive_root();
  const double k = vc.k();
  const double h = 1e-4;
  const auto ac = [&](double s) { return a_closed_form(vc, s); };
  for (double t = 0.05; t < 0.9 * T; t += 0.01 * T) {
    const double da = (ac(t - 2 * h) - 8.0 * ac(t - h) + 8.0 * ac(t + h) - ac(t + 2 * h)) / (12.0 * h);
    const double a = ac(t);
    const double e = vc.M0() / vc.M(t);
    CHECK(std::abs(da + a * a - 4.0 * k * e * e) < 1e-9 * std::max(1.0, a * a));
  }
}

TEST_CASE("k=0 trajectories satisfy a'' + 6aa' + 4a^3 = 0") {
  const auto vc = virial_coefficients(0.25, 1.0, -2.0, 1.0);  // K = 0, a0 = -1
  const double h = 1e-3;
  const auto a = [&](double s) { return a_closed_form(vc, s); };
  for (double t = 0.05; t < 0.6; t += 0.05) {
    const double d1 = (a(t - 2 * h) - 8.0 * a(t - h) + 8.0 * a(t + h) - a(t + 2 * h)) / (12.0 * h);
    const double d2 =
        (-a(t - 2 * h) + 16.0 * a(t - h) - 30.0 * a(t) + 16.0 * a(t + h) - a(t + 2 * h)) /
        (12.0 * h * h);
    const double at = a(t);
    CHECK(std::abs(d2 + 6.0 * at * d1 + 4.0 * at * at * at) < 1e-8 * std::max(1.0, std::abs(at * at * at)));
  }
  // Exact derivatives: a = 1/(t - 1).
  for (double t = 0.1; t < 0.9; t += 0.1) {
    const double a = 1.0 / (t - 1.0);
    const double d1 = -a * a;
    const double d2 = 2.0 * a * a * a;
    CHECK(std::abs(d2 + 6.0 * a * d1 + 4.0 * a * a * a) < 1e-12);
    CHECK(a_closed_form(vc, t) == doctest::Approx(a).epsilon(1e-14));
  }
}

TEST_CASE("integrate_a_ode: separable k=0 solution") {
  const double tol = 1e-10;
  const auto tr = integrate_a_ode(-1.0, 0.0, 2.0, tol);
  CHECK(tr.singular);
  CHECK(tr.t_stop == doctest::Approx(1.0).epsilon(1e-6));
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    if (tr.t[i] > 0.99) break;
    CHECK(std::abs(tr.a[i] - 1.0 / (tr.t[i] - 1.0)) < 100.0 * tol * std::max(1.0, tr.a[i] * tr.a[i]));
  }
}

TEST_CASE("integrate_a_ode: k>0 decays like 1/t") {
  const auto tr = integrate_a_ode(0.0, 0.25, 200.0, 1e-10);
  CHECK_FALSE(tr.singular);
  CHECK(tr.t.back() == 200.0);
  for (std::size_t i = 1; i < tr.t.size(); ++i) {
    CHECK(tr.a[i] > 0.0);
    CHECK(tr.t[i] * tr.a[i] < 1.0 + 1e-8);
  }
}

TEST_CASE("integrate_a_ode matches the closed form up to 0.9 T") {
  for (const auto& [H, M0, M0p] : {std::tuple{0.0, 2.0, -1.0}, std::tuple{1.0, 1.0, -6.0},
                                   std::tuple{-1.0, 1.0, 0.0}, std::tuple{0.02, 1.0, -0.8}}) {
    const auto vc = virial_coefficients(H, M0, M0p, 1.0);
    const double T = vc.first_positive_root();
    const double tol = 1e-10;
    const double a0 = M0p / (2.0 * M0);
    const std::vector<double> probes{0.3 * T, 0.6 * T, 0.9 * T};
    const auto tr = integrate_a_ode(a0, vc.k(), 0.9 * T, tol, probes);
    CHECK_FALSE(tr.singular);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
      CHECK(std::abs(tr.a[i] - a_closed_form(vc, tr.t[i])) < 100.0 * tol);
      CHECK(std::abs(tr.E[i] - vc.M0() / vc.M(tr.t[i])) < 100.0 * tol);
      for (double p : probes) hits += tr.t[i] == p;
    }
    CHECK(hits == probes.size());
  }
}

TEST_CASE("integrate_a_ode rejects bad tolerances") {
  CHECK_THROWS_AS(integrate_a_ode(0.0, 0.0, 1.0, 1e-3), InvalidArgument);
  CHECK_THROWS_AS(integrate_a_ode(0.0, 0.0, 1.0, 1e-13), InvalidArgument);
}

TEST_CASE("classify_blowup examples") {
  {
    const auto r = classify_blowup(virial_coefficients(0.0, 2.0, -1.0, 1.0), 1);
    CHECK(r.regime == Regime::blowup_i);
    CHECK(*r.T == 2.0);
    CHECK(*r.paper_T == 2.0);
    CHECK_FALSE(r.paper_T_differs);
    CHECK(r.amplitude_exponent == 0.25);
    CHECK(r.gradient_exponent == 1.0);
  }
  {
    const auto vc = virial_coefficients(1.0, 1.0, -6.0, 1.0);
    const auto r = classify_blowup(vc, 2);
    CHECK(r.K == -20.0);
    CHECK(r.regime == Regime::blowup_ii);
    CHECK(*r.T == doctest::Approx((6.0 - std::sqrt(20.0)) / 8.0).epsilon(1e-14));
    CHECK(*r.T == doctest::Approx(0.19098).epsilon(1e-4));
    CHECK(*r.paper_T == doctest::Approx(0.7639).epsilon(1e-4));
    CHECK(r.paper_T_differs);
    CHECK(std::abs(vc.M(*r.T)) < 1e-10 * vc.M0());
  }
  {
    const auto r = classify_blowup(virial_coefficients(-1.0, 1.0, 0.0, 1.0), 3);
    CHECK(r.regime == Regime::blowup_iii);
    CHECK(*r.T == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.amplitude_exponent == 0.75);
  }
  {
    const auto r = classify_blowup(virial_coefficients(1.0, 1.0, 0.0, 1.0), 1);
    CHECK(r.regime == Regime::decay);
    CHECK(r.k == 1.0);
    CHECK_FALSE(r.T.has_value());
  }
  {
    // K = 0, M0p < 0: double root.
    const auto vc = virial_coefficients(0.25, 1.0, -2.0, 1.0);
    const auto r = classify_blowup(vc, 2);
    CHECK(r.regime == Regime::blowup_k0);
    CHECK(*r.T == 1.0);
    CHECK(r.amplitude_exponent == 1.0);
    CHECK(r.gradient_exponent == 2.0);
  }
  {
    const auto r = classify_blowup(virial_coefficients(0.0, 1.0, 0.0, 1.0), 1);
    CHECK(r.regime == Regime::global_no_collapse);
    CHECK_FALSE(r.T.has_value());
  }
  {
    const auto r = classify_blowup(virial_coefficients(0.0, 1.0, 0.5, 1.0), 1);
    CHECK(r.regime == Regime::global_no_collapse);
  }
}

TEST_CASE("blow-up time is the smallest positive root") {
  for (double H : {-2.0, -0.5, 0.0, 0.1, 0.5}) {
    for (double M0p : {-3.0, -1.0, -0.1, 0.4}) {
      const auto vc = virial_coefficients(H, 1.3, M0p, 1.0);
      const auto r = classify_blowup(vc, 1);
      if (!r.T) continue;
      CHECK(*r.T > 0.0);
      CHECK(std::abs(vc.M(*r.T)) < 1e-10 * vc.M0());
      for (double s = 0.0; s < *r.T; s += *r.T / 200.0) CHECK(vc.M(s) > 0.0);
    }
  }
}

TEST_CASE("rounded double root stays a root") {
  // 16 H M0 equals fl(M0p^2); the fused discriminant sees the rounding error of M0p^2, which is negative here.
  const double M0p = -0.36724884323755447;
  const auto vc = virial_coefficients(M0p * M0p / 16.0, 1.0, M0p, 1.0);
  CHECK(std::fma(M0p, M0p, -M0p * M0p) < 0.0);
  const auto r = classify_blowup(vc, 1);
  REQUIRE(r.regime == Regime::blowup_k0);
  CHECK(vc.first_positive_root() == doctest::Approx(*r.T).epsilon(1e-6));
  CHECK(TimeFlow::from_virial(vc, 1.0, 1).valid_until() == doctest::Approx(*r.T).epsilon(1e-6));
}

TEST_CASE("blowup report json") {
  const auto j = to_json(classify_blowup(virial_coefficients(0.0, 2.0, -1.0, 1.0), 1));
  CHECK(j["regime"] == "blowup_i");
  CHECK(j["T"].get<double>() == 2.0);
  for (const char* key : {"paper_T", "amplitude_exponent", "gradient_exponent", "K", "k"}) {
    CHECK(j.contains(key));
  }
  const auto d = to_json(classify_blowup(virial_coefficients(1.0, 1.0, 0.0, 1.0), 1));
  CHECK(d["T"].is_null());
}

TEST_CASE("phase integral") {
  const auto vc = virial_coefficients(1.0, 1.0, 0.0, 1.0);
  CHECK(phase_integral(vc, 0.0, 3.0) == 0.0);
  CHECK(std::abs(phase_integral(vc, 1.0, 1.0) - 0.5 * std::atan(2.0)) < 1e-10);
  CHECK(std::abs(phase_integral_closed_form(vc, 1.0, 1.0) - 0.5 * std::atan(2.0)) < 1e-14);
  const auto flat = virial_coefficients(0.0, 3.0, 0.0, 1.0);
  CHECK(phase_integral(flat, 0.7, 2.0) == doctest::Approx(1.4).epsilon(1e-12));
  CHECK(phase_integral_closed_form(flat, 0.7, 2.0) == doctest::Approx(1.4).epsilon(1e-14));
}

TEST_CASE("phase integral closed form agrees with quadrature on every branch") {
  struct Case { double H, M0, M0p; };
  for (const Case c : {Case{1.0, 1.0, 0.3}, Case{0.0, 2.0, -1.0}, Case{0.0, 2.0, 1.0},
                       Case{1.0, 1.0, -6.0}, Case{-1.0, 1.0, 0.0}, Case{0.25, 1.0, -2.0},
                       Case{0.25, 1.0, 2.0}}) {
    const auto vc = virial_coefficients(c.H, c.M0, c.M0p, 1.0);
    const double T = vc.first_positive_root();
    const double t_max = std::isfinite(T) ? 0.95 * T : 5.0;
    for (double t = 0.0; t <= t_max; t += t_max / 7.0) {
      CHECK(std::abs(phase_integral(vc, 1.3, t) - phase_integral_closed_form(vc, 1.3, t)) < 1e-9);
    }
    if (std::isfinite(T)) {
      CHECK_THROWS_AS(phase_integral(vc, 1.0, T), InvalidArgument);
      CHECK_THROWS_AS(phase_integral(vc, 1.0, 1.1 * T), InvalidArgument);
    }
  }
}

TEST_CASE("profile-mode flow follows M") {
  const auto vc = virial_coefficients(-0.2, 1.5, 0.3, 2.0);
  const auto f = TimeFlow::from_virial(vc, 1.0, 2);
  CHECK(f.mode() == FlowMode::profile);
  CHECK(f.scale(0.0) == 1.0);
  CHECK(f.drift(0.0) == std::vector<double>{0.0, 0.0});
  CHECK(f.gamma(0.0) == 0.0);
  CHECK(f.valid_until() == vc.first_positive_root());
  for (double t = 0.0; t < 0.9 * f.valid_until(); t += 0.05) {
    CHECK(f.a(t) == doctest::Approx(a_closed_form(vc, t)).epsilon(1e-12));
    CHECK(f.scale(t) == doctest::Approx(std::sqrt(vc.M(t) / vc.M0())).epsilon(1e-12));
    CHECK(std::abs(f.gamma(t) - phase_integral(vc, 1.0, t)) < 1e-9);
    CHECK(std::abs(f.gamma(t) - f.gamma_closed_form(t)) < 1e-9);
    CHECK(f.b(t) == 0.0);
  }
  CHECK_THROWS_AS(f.a(f.valid_until()), InvalidArgument);
  CHECK_THROWS_AS(f.scale(2.0 * f.valid_until()), InvalidArgument);
  CHECK_THROWS_AS(f.gamma(-1.0), InvalidArgument);
}

TEST_CASE("general flow: solitary wave") {
  const auto f = general_timeflow(0.0, 0.0, 0.0, 1.0, {1.0});
  CHECK(std::isinf(f.valid_until()));
  for (double t : {0.0, 0.5, 3.0}) {
    CHECK(f.a(t) == 0.0);
    CHECK(f.b(t) == 0.0);
    CHECK(f.gamma(t) == doctest::Approx(t));
    CHECK(f.gamma_closed_form(t) == doctest::Approx(t));
  }
}

TEST_CASE("general flow: accelerated drift") {
  const double k1 = 0.3, b0 = -0.4;
  const auto f = general_timeflow(0.0, b0, k1, 1.0, {0.6, 0.8});
  for (double t : {0.0, 0.7, 2.0}) {
    const auto d = f.drift(t);
    CHECK(d[0] == doctest::Approx(0.6 * t * (k1 * t + b0)));
    CHECK(d[1] == doctest::Approx(0.8 * t * (k1 * t + b0)));
    CHECK(f.b(t) == doctest::Approx(2.0 * k1 * t + b0));
  }
}

TEST_CASE("general flow: focusing lens") {
  const auto f = general_timeflow(-0.5, 0.2, 0.1, 1.0, {1.0});
  CHECK(f.valid_until() == 2.0);
  CHECK(f.scale(1.999) == doctest::Approx(0.0005).epsilon(1e-9));
  CHECK_THROWS_AS(f.scale(2.0), InvalidArgument);
  CHECK(f.drift(0.0)[0] == 0.0);
  CHECK(f.scale(0.0) == 1.0);
}

TEST_CASE("general flow: phase and drift satisfy their rate equations") {
  const auto f = general_timeflow(-0.3, 0.5, 0.2, 1.1, {0.3, -0.4, 1.2});
  const double h = 1e-5;
  for (double t = 0.1; t < 0.9 * f.valid_until(); t += 0.2) {
    CHECK(std::abs(f.gamma(t) - f.gamma_closed_form(t)) < 1e-9);
    const double dg = (f.gamma_closed_form(t + h) - f.gamma_closed_form(t - h)) / (2.0 * h);
    CHECK(dg == doctest::Approx(f.gamma_rate(t)).epsilon(1e-8));
    // d'(t) = Lambda b(t) / s(t)
    const double dd = (f.drift(t + h)[2] - f.drift(t - h)[2]) / (2.0 * h);
    CHECK(dd == doctest::Approx(1.2 * f.b(t) / f.scale(t)).epsilon(1e-8));
    // a = s'/s
    const double ds = (f.scale(t + h) - f.scale(t - h)) / (2.0 * h);
    CHECK(ds / f.scale(t) == doctest::Approx(f.a(t)).epsilon(1e-9));
  }
}

TEST_CASE("general flow reduces to the k=0 profile flow") {
  for (double a0 : {-0.7, 0.4}) {
    const auto g = general_timeflow(a0, 0.0, 0.0, 1.0, {1.0});
    const auto p = TimeFlow::profile(a0, 0.0, 1.0, 1);
    if (std::isfinite(g.valid_until())) {
      CHECK(g.valid_until() == doctest::Approx(p.valid_until()).epsilon(1e-13));
    } else {
      CHECK(std::isinf(p.valid_until()));
    }
    const double t_max = std::isfinite(g.valid_until()) ? 0.99 * g.valid_until() : 10.0;
    for (double t = 0.0; t < t_max; t += t_max / 50.0) {
      CHECK(std::abs(g.scale(t) - p.scale(t)) < 1e-12);
      CHECK(std::abs(g.gamma(t) - p.gamma(t)) < 1e-9);
    }
  }
}

TEST_CASE("time flow csv") {
  const auto dir = std::filesystem::temp_directory_path() / "hydronls_test_timeflow";
  std::filesystem::create_directories(dir);
  const auto f = general_timeflow(0.0, 1.0, 0.5, 1.0, {1.0, 0.0});
  const std::vector<double> times{0.0, 0.5, 1.0};
  write_timeflow_csv(dir / "flow.csv", f, times);
  std::ifstream is(dir / "flow.csv");
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,a,b,gamma,scale,drift_1,drift_2");
  int rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("q_lambda") {
  CHECK(q_lambda(0.0, 5.0, 123.0) == 5.0);
  CHECK(q_lambda(2.0, 1.0, 3.0) == 7.0);
}

TEST_CASE("functional flow: radial data") {
  const auto ff = functional_timeflow(2.0, 0.3, 1.5, -0.4, 0.0, 0.0, 1.0, -0.4 / 3.0);
  CHECK(ff.C() == doctest::Approx(3.0));
  for (double t = 0.0; t < 2.0; t += 0.25) {
    CHECK(std::abs(ff.a(t) - ff.a_reintegrated(t)) < 1e-8);
    CHECK(std::abs(ff.b(t) - ff.b_reintegrated(t)) < 1e-8);
    CHECK(ff.b(t) == 0.0);
  }
}

TEST_CASE("functional flow with momentum agrees with its ODE and the moment law") {
  const double N = 2.0, H = 0.1, M0 = 1.5, M0p = 0.2, Q0 = 0.3, Pl = 0.5, L = 0.8;
  const auto ff = functional_timeflow(N, H, M0, M0p, Q0, Pl, L, 0.1);
  CHECK_FALSE(ff.literal_coefficients_agree());
  CHECK(ff.A_literal() != ff.A());
  for (double t = 0.0; t < 3.0; t += 0.3) {
    CHECK(std::abs(ff.a(t) - ff.a_reintegrated(t)) < 1e-8);
    CHECK(std::abs(ff.b(t) - ff.b_reintegrated(t)) < 1e-8);
    // P~ = a Q + b N |Lambda|^2 by construction.
    CHECK(Pl == doctest::Approx(ff.a(t) * q_lambda(Pl, Q0, t) + ff.b(t) * N * L * L));
  }
  // With the consistent initial chirp a0 = B/(2C), a = F'/(2F), i.e. the moment law
  // M' = 2aM + 2bQ closes on M(t) = 4Ht^2 + M0p t + M0.
  const auto fc = functional_timeflow(N, H, M0, M0p, Q0, Pl, L, 0.0);
  const double a0 = fc.B() / (2.0 * fc.C());
  const auto g = functional_timeflow(N, H, M0, M0p, Q0, Pl, L, a0);
  const auto vc = virial_coefficients(H, M0, M0p, N);
  for (double t = 0.0; t < 3.0; t += 0.3) {
    const double Q = q_lambda(Pl, Q0, t);
    CHECK(vc.M_prime(t) == doctest::Approx(2.0 * g.a(t) * vc.M(t) + 2.0 * g.b(t) * Q).epsilon(1e-12));
  }
}

TEST_CASE("functional flow degenerate and invalid inputs") {
  // A = B = 0 keeps a constant.
  const double N = 1.0, L = 1.0, Pl = 0.0, Q0 = 0.0;
  const auto ff = functional_timeflow(N, 0.0, 1.0, 0.0, Q0, Pl, L, 0.37);
  CHECK(ff.A() == 0.0);
  CHECK(ff.B() == 0.0);
  for (double t : {0.0, 1.0, 10.0}) CHECK(ff.a(t) == doctest::Approx(0.37));
  // Hoelder violation.
  CHECK_THROWS_AS(functional_timeflow(1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(functional_timeflow(1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0), InvalidArgument);
}
