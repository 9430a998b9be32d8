#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "hydronls/error.hpp"
#include "hydronls/profile.hpp"
#include "json.hpp"

using namespace hydronls;

namespace {

double sup_diff(const RadialProfile& a, const RadialProfile& b, double lo, double hi) {
  double worst = 0.0;
  for (double r = lo; r <= hi; r += 1e-2) worst = std::max(worst, std::abs(a(r) - b(r)));
  return worst;
}

const RadialProfile& gs1() {
  static const RadialProfile p = ground_state(1, 1e-8);
  return p;
}

}  // namespace

TEST_CASE("1D ground state matches the closed form") {
  const auto& p = gs1();
  const double u0 = std::pow(3.0, 0.25);
  CHECK(std::abs(p.u_center() - u0) < 1e-8);
  for (double x = 0.0; x <= 30.0; x += 0.01) {
    const double exact = u0 / std::sqrt(std::cosh(2.0 * x));
    CHECK(std::abs(p(x) - exact) < 1e-8);
  }
  // Symmetric extension and analytic tail.
  CHECK(p(-1.3) == p(1.3));
  CHECK(p(45.0) > 0.0);
  CHECK(p(45.0) == doctest::Approx(u0 * std::sqrt(2.0) * std::exp(-45.0)).epsilon(1e-6));
}

TEST_CASE("2D ground state oracle") {
  const auto p = ground_state(2, 1e-8);
  CHECK(p.u_center() == doctest::Approx(2.2062).epsilon(5e-5));
  const auto norms = profile_norms(p);
  CHECK(norms.mass == doctest::Approx(11.70).epsilon(1e-3));
}

TEST_CASE("ground state energy vanishes") {
  for (int n = 1; n <= 3; ++n) {
    const auto p = n == 1 ? gs1() : ground_state(n, 1e-8);
    const auto norms = profile_norms(p);
    CHECK(norms.grad_sq > 0.0);
    CHECK(std::abs(norms.energy) <= 1e-5 * norms.grad_sq);
    // Decreasing and positive.
    for (std::size_t i = 1; i < p.values().size(); ++i) {
      CHECK(p.values()[i] > 0.0);
      CHECK(p.values()[i] < p.values()[i - 1]);
    }
    CHECK(profile_residual(p) < 1e-7);
  }
}

TEST_CASE("ground state rejects bad input") {
  CHECK_THROWS_AS(ground_state(0, 1e-8), InvalidArgument);
  CHECK_THROWS_AS(ground_state(4, 1e-8), InvalidArgument);
  CHECK_THROWS_AS(ground_state(1, 1e-2), InvalidArgument);
  CHECK_THROWS_AS(ground_state(1, 1e-13), InvalidArgument);
  ProfileOptions short_domain;
  short_domain.max_radius = 1.0;
  CHECK_THROWS_AS(ground_state(1, 1e-8, short_domain), SolverError);
}

TEST_CASE("ground state is stable under node refinement") {
  const double tol = 1e-8;
  ProfileOptions fine;
  fine.node_spacing = 0.5 * ProfileOptions{}.node_spacing;
  for (int n = 1; n <= 2; ++n) {
    const auto a = ground_state(n, tol);
    const auto b = ground_state(n, tol, fine);
    CHECK(std::abs(a.u_center() - b.u_center()) < 10.0 * tol);
  }
}

TEST_CASE("residual of sampled closed form, zero and perturbed profiles") {
  const double u0 = std::pow(3.0, 0.25);
  std::vector<double> r, u, z, big;
  for (int i = 0; i <= 20000; ++i) {
    const double x = 1e-3 * i;
    r.push_back(x);
    u.push_back(u0 / std::sqrt(std::cosh(2.0 * x)));
    z.push_back(0.0);
    big.push_back(1.01 * u.back());
  }
  const auto params = quadratic_params(1, 0.0, 1.0);
  const RadialProfile exact(params, ProfileKind::ground_state, r, u, u0, 20.0);
  CHECK(profile_residual(exact) < 1e-6);
  const RadialProfile zero(params, ProfileKind::dirichlet_ball, r, z, 0.0, 20.0);
  CHECK(profile_residual(zero) == 0.0);
  const RadialProfile perturbed(params, ProfileKind::ground_state, r, big, 1.01 * u0, 20.0);
  CHECK(profile_residual(perturbed) > 1e-2);

  // Fewer than 5 nodes cannot carry the finite-difference stencil.
  CHECK_THROWS_AS(RadialProfile(params, ProfileKind::dirichlet_ball, {0.0, 0.1, 0.2, 0.3},
                                {1.0, 0.9, 0.5, 0.0}, 1.0, 0.3),
                  InvalidArgument);
}

TEST_CASE("dirichlet k=0 reduces to the ground state") {
  const double tol = 1e-6;
  const auto d = dirichlet_profile(1, 0.0, 1.0, 14.0, tol);
  CHECK(sup_diff(d, gs1(), 0.0, 14.0) < 10.0 * tol);
  CHECK(d.support_radius() == 14.0);
  CHECK(d.values().back() == 0.0);
  CHECK(d(14.5) == 0.0);
}

TEST_CASE("dirichlet solutions approach the ground state as the ball grows") {
  double prev = 1e300;
  for (double rho : {4.0, 6.0, 8.0, 10.0}) {
    const auto d = dirichlet_profile(1, 0.0, 1.0, rho, 1e-8);
    const double diff = sup_diff(d, gs1(), 0.0, 3.0);
    CHECK(diff < prev);
    prev = diff;
  }
}

TEST_CASE("dirichlet postconditions") {
  const auto check_post = [](const RadialProfile& p) {
    const auto v = p.values();
    CHECK(v.back() == 0.0);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) CHECK(v[i] > 0.0);
    CHECK(profile_residual(p) < 1e-6);
  };
  check_post(dirichlet_profile(2, 0.0, 1.0, 6.0, 1e-8));
  check_post(dirichlet_profile(3, -0.2, 1.0, 3.0, 1e-8));
  // k < 0: for a small enough ball a positive profile exists.
  bool found = false;
  for (double rho = 14.0; rho > 0.2 && !found; rho *= 0.7) {
    try {
      const auto p = dirichlet_profile(1, -1.0, 1.0, rho, 1e-8);
      check_post(p);
      found = true;
    } catch (const SolverError&) {
    }
  }
  CHECK(found);
}

TEST_CASE("dirichlet centre-peaked branch with a scan start") {
  ProfileOptions opt;
  opt.scan_start = 0.9 * std::pow(8.0, 0.25) * 1.316074;
  const auto p = dirichlet_profile(1, -0.5, 8.0, 2.5, 1e-8, opt);
  CHECK(p.peak() == doctest::Approx(p.u_center()));
  CHECK(p.values().back() == 0.0);
  CHECK(profile_residual(p) < 1e-6);
}

TEST_CASE("dirichlet rejects bad input") {
  CHECK_THROWS_AS(dirichlet_profile(1, 0.5, 1.0, 3.0, 1e-8), InvalidArgument);
  CHECK_THROWS_AS(dirichlet_profile(1, 0.0, 1.0, 0.0, 1e-8), InvalidArgument);
}

TEST_CASE("stark profile with k1=0 reduces to the ground state") {
  const double tol = 1e-5;
  const auto s = stark_profile_1d(0.0, 1.0, 12.0, tol);
  CHECK_FALSE(s.is_radial());
  for (double x = -12.0; x <= 12.0; x += 1e-2) CHECK(std::abs(s(x) - gs1()(x)) < 10.0 * tol);
}

TEST_CASE("stark profile postconditions and peak shift") {
  const auto s = stark_profile_1d(0.1, 1.0, 6.0, 1e-8);
  const auto v = s.values();
  CHECK(v.front() == 0.0);
  CHECK(v.back() == 0.0);
  for (std::size_t i = 1; i + 1 < v.size(); ++i) CHECK(v[i] > 0.0);
  std::size_t imax = 0;
  for (std::size_t i = 0; i < v.size(); ++i) if (v[i] > v[imax]) imax = i;
  CHECK(s.nodes()[imax] < 0.0);
  CHECK(profile_residual(s) < 1e-6);
  CHECK(s(7.0) == 0.0);
  CHECK(s(-7.0) == 0.0);
}

TEST_CASE("profile export") {
  const auto dir = std::filesystem::temp_directory_path() / "hydronls_test_profile";
  std::filesystem::create_directories(dir);
  const auto csv = dir / "gs.csv";
  write_profile(csv, gs1());
  std::ifstream is(csv);
  std::string header;
  std::getline(is, header);
  CHECK(header == "r,u");
  std::ifstream js(dir / "gs.json");
  const auto j = nlohmann::json::parse(js);
  CHECK(j.contains("u_center"));
  CHECK(j.contains("residual"));
  CHECK(j.contains("support_radius"));
  CHECK(j["u_center"].get<double>() == gs1().u_center());
}
