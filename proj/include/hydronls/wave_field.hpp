#pragma once

#include <complex>
#include <span>
#include <vector>

#include "hydronls/grid.hpp"

namespace hydronls {

using complex = std::complex<double>;

/// Complex samples of Psi(x, t) on a Grid, row-major, tagged with the time they represent.
class WaveField {
 public:
  /// Throws InvalidArgument on a size mismatch or non-finite samples.
  WaveField(Grid grid, std::vector<complex> values, double time_tag = 0.0);

  /// Zero field.
  explicit WaveField(Grid grid, double time_tag = 0.0);

  const Grid& grid() const { return grid_; }
  std::span<const complex> values() const { return values_; }
  std::span<complex> mutable_values() { return values_; }
  double time_tag() const { return time_tag_; }
  void set_time_tag(double t) { time_tag_ = t; }

  double max_modulus() const;
  bool all_finite() const;

 private:
  Grid grid_;
  std::vector<complex> values_;
  double time_tag_;
};

}  // namespace hydronls
