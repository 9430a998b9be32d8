#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hydronls/error.hpp"
#include "hydronls/field_io.hpp"
#include "hydronls/grid.hpp"
#include "hydronls/quadrature.hpp"
#include "hydronls/spectral.hpp"
#include "hydronls/wave_field.hpp"

using namespace hydronls;
using std::numbers::pi;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "hydronls_test_fields";
  std::filesystem::create_directories(dir);
  return dir / name;
}

template <class F>
WaveField sample(const Grid& g, F f) {
  std::vector<complex> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.position(i));
  return WaveField(g, std::move(v));
}

}  // namespace

TEST_CASE("make_grid basic shapes") {
  const Grid g = make_grid(1, 8, 1.0);
  CHECK(g.spacing() == 0.25);
  CHECK(g.size() == 8);
  CHECK(g.coordinates()[0] == -1.0);
  for (double k : g.wavenumbers()) {
    CHECK(std::abs(k / pi - std::round(k / pi)) < 1e-15);
  }
  CHECK(g.wavenumbers()[1] == doctest::Approx(pi));
  CHECK(g.wavenumbers()[g.nyquist_index()] == doctest::Approx(-4.0 * pi));

  const Grid g2 = make_grid(2, 256, 10.0);
  CHECK(g2.size() == 65536);
  CHECK(g2.spacing() == 0.078125);
  CHECK(g2.spacing() * g2.points_per_dim() == 2.0 * g2.half_width());
}

TEST_CASE("make_grid rejects bad input") {
  CHECK_THROWS_AS(make_grid(1, 7, 1.0), InvalidArgument);
  CHECK_THROWS_AS(make_grid(1, 4, 1.0), InvalidArgument);
  CHECK_THROWS_AS(make_grid(0, 8, 1.0), InvalidArgument);
  CHECK_THROWS_AS(make_grid(4, 8, 1.0), InvalidArgument);
  CHECK_THROWS_AS(make_grid(1, 8, 0.0), InvalidArgument);
  CHECK_THROWS_AS(make_grid(1, 8, -1.0), InvalidArgument);
}

TEST_CASE("ravel and unravel are inverse") {
  const Grid g = make_grid(3, 8, 2.0);
  for (std::size_t i = 0; i < g.size(); i += 37) CHECK(g.ravel(g.unravel(i)) == i);
  CHECK(g.on_boundary(0));
  CHECK_FALSE(g.on_boundary(g.ravel({3, 4, 5})));
}

TEST_CASE("wave field validates") {
  const Grid g = make_grid(1, 8, 1.0);
  CHECK_THROWS_AS(WaveField(g, std::vector<complex>(7)), InvalidArgument);
  std::vector<complex> bad(8);
  bad[3] = complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(WaveField(g, bad), InvalidArgument);
  WaveField z(g, 0.5);
  CHECK(z.max_modulus() == 0.0);
  CHECK(z.time_tag() == 0.5);
}

TEST_CASE("laplacian of sin(pi x)") {
  const Grid g = make_grid(1, 64, 1.0);
  const auto f = sample(g, [](auto p) { return complex(std::sin(pi * p[0]), 0.0); });
  const auto d = spectral_derivatives(f);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coordinates()[i];
    CHECK(std::abs(d.laplacian[i] + pi * pi * std::sin(pi * x)) < 1e-12 * pi * pi);
    CHECK(std::abs(d.gradient[0][i] - pi * std::cos(pi * x)) < 1e-12);
  }
}

TEST_CASE("constant field has zero derivatives") {
  const Grid g = make_grid(2, 16, 3.0);
  const auto f = sample(g, [](auto) { return complex(2.0, -1.0); });
  const auto d = spectral_derivatives(f);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(d.laplacian[i]) < 1e-13);
    CHECK(std::abs(d.gradient[0][i]) < 1e-13);
    CHECK(std::abs(d.gradient[1][i]) < 1e-13);
  }
}

TEST_CASE("plane waves are eigenfunctions") {
  const Grid g = make_grid(2, 32, 2.0);
  const double k0 = 3.0 * pi / 2.0;
  const double k1 = -5.0 * pi / 2.0;
  const auto f = sample(g, [&](auto p) { return std::exp(complex(0.0, k0 * p[0] + k1 * p[1])); });
  const auto d = spectral_derivatives(f);
  const double ksq = k0 * k0 + k1 * k1;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const complex v = f.values()[i];
    CHECK(std::abs(d.gradient[0][i] - complex(0.0, k0) * v) < 1e-12 * k0);
    CHECK(std::abs(d.gradient[1][i] - complex(0.0, k1) * v) < 1e-12 * std::abs(k1));
    CHECK(std::abs(d.laplacian[i] + ksq * v) < 1e-12 * ksq);
  }
}

TEST_CASE("quadrature examples") {
  const Grid g = make_grid(1, 512, 10.0);
  std::vector<double> s(g.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::exp(-g.coordinates()[i] * g.coordinates()[i]);
  CHECK(std::abs(quadrature_integrate(s, g) - std::sqrt(pi)) < 1e-12);

  const Grid g3 = make_grid(3, 8, 1.5);
  std::vector<double> ones(g3.size(), 1.0);
  CHECK(quadrature_integrate(ones, g3) == doctest::Approx(27.0).epsilon(1e-14));

  // Odd about the box centre: the grid contains -L but not +L, so pair x with -x.
  const Grid g1 = make_grid(1, 64, 2.0);
  std::vector<double> odd(g1.size());
  for (std::size_t i = 1; i < odd.size(); ++i) odd[i] = std::sin(g1.coordinates()[i]) * 3.0;
  odd[0] = 0.0;
  odd[g1.nyquist_index()] = 0.0;
  CHECK(std::abs(quadrature_integrate(odd, g1)) < 1e-14);

  CHECK_THROWS_AS(quadrature_integrate(std::vector<double>(3, 1.0), g1), InvalidArgument);
}

TEST_CASE("adaptive simpson") {
  const double v = adaptive_simpson([](double x) { return 1.0 / (1.0 + 4.0 * x * x); }, 0.0, 1.0, 1e-12);
  CHECK(std::abs(v - 0.5 * std::atan(2.0)) < 1e-12);
  CHECK(adaptive_simpson([](double) { return 1.0; }, 2.0, 2.0, 1e-10) == 0.0);
}

TEST_CASE("plancherel: |grad psi|^2 in x and k space agree") {
  const Grid g = make_grid(2, 32, 4.0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  // Band-limited random field: random coefficients on |k index| <= 6.
  std::vector<complex> hat(g.size(), complex(0.0));
  const int n = g.points_per_dim();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.unravel(i);
    const auto signed_index = [&](std::size_t j) {
      const int s = static_cast<int>(j);
      return s < n / 2 ? s : s - n;
    };
    if (std::abs(signed_index(idx[0])) <= 6 && std::abs(signed_index(idx[1])) <= 6) {
      hat[i] = complex(nd(rng), nd(rng));
    }
  }
  std::vector<complex> psi = hat;
  FourierTransform fft(g);
  fft.backward(psi);
  const WaveField f(g, psi);
  const auto d = spectral_derivatives(f);
  std::vector<double> dens(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    dens[i] = std::norm(d.gradient[0][i]) + std::norm(d.gradient[1][i]);
  }
  const double x_side = quadrature_integrate(dens, g);

  std::vector<complex> check = psi;
  fft.forward(check);
  const auto ksq = squared_wavenumbers(g);
  double k_side = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) k_side += ksq[i] * std::norm(check[i]);
  const double volume = std::pow(2.0 * g.half_width(), 2);
  k_side *= volume / static_cast<double>(g.size() * g.size());
  CHECK(std::abs(x_side - k_side) <= 1e-10 * k_side);
}

TEST_CASE("wfield round trip") {
  const Grid g = make_grid(2, 8, 1.25);
  const auto f = sample(g, [](auto p) { return complex(p[0] + 0.1, -p[1] * 1e-300); });
  WaveField tagged = f;
  tagged.set_time_tag(0.375);
  const auto path = scratch("roundtrip.wfield");
  write_wfield(path, tagged);
  const WaveField back = read_wfield(path);
  CHECK(back.grid() == g);
  CHECK(back.time_tag() == 0.375);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(back.values()[i] == tagged.values()[i]);
  CHECK(std::filesystem::file_size(path) > g.size() * 16);
}

TEST_CASE("wfield rejects truncated payload") {
  const Grid g = make_grid(1, 8, 1.0);
  const auto path = scratch("short.wfield");
  write_wfield(path, WaveField(g));
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  CHECK_THROWS(read_wfield(path));
}

TEST_CASE("field csv is 1D only") {
  CHECK_THROWS_AS(write_field_csv(scratch("x.csv"), WaveField(make_grid(2, 8, 1.0))),
                  InvalidArgument);
  write_field_csv(scratch("ok.csv"), WaveField(make_grid(1, 8, 1.0)));
  std::ifstream is(scratch("ok.csv"));
  std::string header;
  std::getline(is, header);
  CHECK(header == "x,re,im");
}
