#include "hydronls/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

#include "hydronls/error.hpp"

namespace hydronls {
namespace {

// The FFTW planner is not reentrant; execution with fftw_execute is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FourierTransform::FourierTransform(const Grid& grid) : grid_(grid) {
  std::lock_guard lock(planner_mutex());
  auto* buf = fftw_alloc_complex(grid.size());
  int dims[3] = {grid.points_per_dim(), grid.points_per_dim(), grid.points_per_dim()};
  plan_forward_ = fftw_plan_dft(grid.n_dims(), dims, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_backward_ = fftw_plan_dft(grid.n_dims(), dims, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  buffer_ = buf;
  if (plan_forward_ == nullptr || plan_backward_ == nullptr) {
    throw SolverError("fft: plan creation failed");
  }
}

FourierTransform::~FourierTransform() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_backward_));
  fftw_free(buffer_);
}

void FourierTransform::forward(std::span<complex> data) {
  if (data.size() != grid_.size()) throw InvalidArgument("fft: size mismatch");
  std::memcpy(buffer_, data.data(), data.size_bytes());
  fftw_execute(static_cast<fftw_plan>(plan_forward_));
  std::memcpy(data.data(), buffer_, data.size_bytes());
}

void FourierTransform::backward(std::span<complex> data) {
  if (data.size() != grid_.size()) throw InvalidArgument("fft: size mismatch");
  std::memcpy(buffer_, data.data(), data.size_bytes());
  fftw_execute(static_cast<fftw_plan>(plan_backward_));
  const double scale = 1.0 / static_cast<double>(grid_.size());
  const auto* src = static_cast<const complex*>(buffer_);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = src[i] * scale;
}

std::vector<double> squared_wavenumbers(const Grid& grid) {
  std::vector<double> k2(grid.size());
  const auto k = grid.wavenumbers();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto idx = grid.unravel(i);
    double s = 0.0;
    for (int d = 0; d < grid.n_dims(); ++d) s += k[idx[d]] * k[idx[d]];
    k2[i] = s;
  }
  return k2;
}

SpectralDerivatives spectral_derivatives(const Grid& grid, std::span<const complex> values) {
  if (values.size() != grid.size()) throw InvalidArgument("spectral_derivatives: size mismatch");
  FourierTransform fft(grid);
  std::vector<complex> hat(values.begin(), values.end());
  fft.forward(hat);

  const auto k = grid.wavenumbers();
  const auto nyq = grid.nyquist_index();
  SpectralDerivatives out;
  out.gradient.resize(grid.n_dims());
  for (int d = 0; d < grid.n_dims(); ++d) {
    auto& g = out.gradient[d];
    g.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto j = grid.unravel(i)[d];
      g[i] = j == nyq ? complex{} : complex{0.0, k[j]} * hat[i];
    }
    fft.backward(g);
  }
  const auto k2 = squared_wavenumbers(grid);
  out.laplacian.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out.laplacian[i] = -k2[i] * hat[i];
  fft.backward(out.laplacian);
  return out;
}

SpectralDerivatives spectral_derivatives(const WaveField& field) {
  if (!field.all_finite()) throw InvalidArgument("spectral_derivatives: non-finite field");
  return spectral_derivatives(field.grid(), field.values());
}

std::vector<std::vector<double>> spectral_gradient(const Grid& grid, std::span<const double> values) {
  std::vector<complex> c(values.begin(), values.end());
  auto d = spectral_derivatives(grid, c);
  std::vector<std::vector<double>> out(grid.n_dims(), std::vector<double>(grid.size()));
  for (int dim = 0; dim < grid.n_dims(); ++dim) {
    std::transform(d.gradient[dim].begin(), d.gradient[dim].end(), out[dim].begin(),
                   [](const complex& z) { return z.real(); });
  }
  return out;
}

void apply_laplacian(FourierTransform& fft, std::span<const complex> in, std::span<complex> out) {
  const Grid& grid = fft.grid();
  if (in.size() != grid.size() || out.size() != grid.size()) {
    throw InvalidArgument("apply_laplacian: size mismatch");
  }
  std::copy(in.begin(), in.end(), out.begin());
  fft.forward(out);
  const auto k2 = squared_wavenumbers(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] *= -k2[i];
  fft.backward(out);
}

}  // namespace hydronls
