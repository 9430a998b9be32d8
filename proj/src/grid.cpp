#include "hydronls/grid.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "hydronls/error.hpp"

namespace hydronls {

Grid::Grid(int n_dims, int points_per_dim, double half_width)
    : n_dims_(n_dims), points_(points_per_dim), half_width_(half_width) {
  if (n_dims < 1 || n_dims > 3) {
    throw InvalidArgument("grid: n_dims must be 1, 2 or 3, got " + std::to_string(n_dims));
  }
  if (points_per_dim < 8 || !std::has_single_bit(static_cast<unsigned>(points_per_dim))) {
    throw InvalidArgument("grid: points_per_dim must be a power of two >= 8, got " +
                          std::to_string(points_per_dim));
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw InvalidArgument("grid: half_width must be positive and finite");
  }
  // Power-of-two divisor: 2L/N is exact in binary floating point.
  spacing_ = 2.0 * half_width / points_per_dim;
  cell_volume_ = std::pow(spacing_, n_dims);
  size_ = 1;
  for (int d = 0; d < n_dims; ++d) size_ *= static_cast<std::size_t>(points_per_dim);

  coords_.resize(points_per_dim);
  wavenumbers_.resize(points_per_dim);
  const double k0 = std::numbers::pi / half_width;
  for (int j = 0; j < points_per_dim; ++j) {
    coords_[j] = -half_width + j * spacing_;
    const int m = j < points_per_dim / 2 ? j : j - points_per_dim;
    wavenumbers_[j] = k0 * m;
  }
}

std::array<std::size_t, 3> Grid::unravel(std::size_t flat) const {
  std::array<std::size_t, 3> idx{0, 0, 0};
  const auto n = static_cast<std::size_t>(points_);
  for (int d = n_dims_ - 1; d >= 0; --d) {
    idx[d] = flat % n;
    flat /= n;
  }
  return idx;
}

std::size_t Grid::ravel(const std::array<std::size_t, 3>& idx) const {
  std::size_t flat = 0;
  for (int d = 0; d < n_dims_; ++d) flat = flat * static_cast<std::size_t>(points_) + idx[d];
  return flat;
}

std::array<double, 3> Grid::position(std::size_t flat) const {
  const auto idx = unravel(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int d = 0; d < n_dims_; ++d) x[d] = coords_[idx[d]];
  return x;
}

bool Grid::on_boundary(std::size_t flat) const {
  const auto idx = unravel(flat);
  const auto last = static_cast<std::size_t>(points_ - 1);
  for (int d = 0; d < n_dims_; ++d) {
    if (idx[d] == 0 || idx[d] == last) return true;
  }
  return false;
}

Grid make_grid(int n_dims, int points_per_dim, double half_width) {
  return Grid(n_dims, points_per_dim, half_width);
}

}  // namespace hydronls
