#pragma once

#include <span>
#include <vector>

#include "hydronls/grid.hpp"
#include "hydronls/wave_field.hpp"

namespace hydronls {

/// Owns an FFTW plan pair and an aligned work buffer sized for one Grid.
/// Plans are created with FFTW_ESTIMATE so results do not depend on timing.
/// forward() is unnormalised; backward() divides by the number of points.
class FourierTransform {
 public:
  explicit FourierTransform(const Grid& grid);
  ~FourierTransform();
  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  const Grid& grid() const { return grid_; }
  void forward(std::span<complex> data);
  void backward(std::span<complex> data);

 private:
  Grid grid_;
  void* buffer_;
  void* plan_forward_;
  void* plan_backward_;
};

struct SpectralDerivatives {
  /// One component per dimension.
  std::vector<std::vector<complex>> gradient;
  std::vector<complex> laplacian;
};

/// Gradient and Laplacian by Fourier multipliers. The Nyquist mode is dropped
/// from the first derivative and kept (as -k^2) in the Laplacian.
SpectralDerivatives spectral_derivatives(const WaveField& field);
SpectralDerivatives spectral_derivatives(const Grid& grid, std::span<const complex> values);

/// Real-valued gradient of real samples (same multipliers as above).
std::vector<std::vector<double>> spectral_gradient(const Grid& grid, std::span<const double> values);

/// Laplacian only; reuses a caller-owned transform.
void apply_laplacian(FourierTransform& fft, std::span<const complex> in, std::span<complex> out);

/// Squared wavenumber magnitude |k|^2 for every grid mode (row-major).
std::vector<double> squared_wavenumbers(const Grid& grid);

}  // namespace hydronls
