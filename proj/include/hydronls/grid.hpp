#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace hydronls {

/// Periodic Cartesian box [-L, L)^n sampled with the same number of points per
/// dimension. Coordinates are x_j = -L + j*h; wavenumbers follow the DFT layout
/// (0, 1, ..., N/2-1, -N/2, ..., -1) * pi/L.
class Grid {
 public:
  Grid(int n_dims, int points_per_dim, double half_width);

  int n_dims() const { return n_dims_; }
  int points_per_dim() const { return points_; }
  double half_width() const { return half_width_; }
  double spacing() const { return spacing_; }
  /// Volume element h^n.
  double cell_volume() const { return cell_volume_; }
  std::size_t size() const { return size_; }

  /// 1D coordinate samples, shared by every dimension.
  std::span<const double> coordinates() const { return coords_; }
  /// 1D wavenumbers, shared by every dimension.
  std::span<const double> wavenumbers() const { return wavenumbers_; }
  /// Index of the Nyquist mode in wavenumbers().
  std::size_t nyquist_index() const { return static_cast<std::size_t>(points_ / 2); }

  /// Multi-index of a row-major flat index; unused trailing entries are 0.
  std::array<std::size_t, 3> unravel(std::size_t flat) const;
  std::size_t ravel(const std::array<std::size_t, 3>& idx) const;
  /// Physical position of a flat index.
  std::array<double, 3> position(std::size_t flat) const;

  /// True when `flat` lies on the first or last slab of any dimension.
  bool on_boundary(std::size_t flat) const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.n_dims_ == b.n_dims_ && a.points_ == b.points_ && a.half_width_ == b.half_width_;
  }

 private:
  int n_dims_;
  int points_;
  double half_width_;
  double spacing_;
  double cell_volume_;
  std::size_t size_;
  std::vector<double> coords_;
  std::vector<double> wavenumbers_;
};

Grid make_grid(int n_dims, int points_per_dim, double half_width);

}  // namespace hydronls
