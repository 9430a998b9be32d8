#include "hydronls/wave_field.hpp"

#include <algorithm>
#include <cmath>

#include "hydronls/error.hpp"

namespace hydronls {

WaveField::WaveField(Grid grid, std::vector<complex> values, double time_tag)
    : grid_(std::move(grid)), values_(std::move(values)), time_tag_(time_tag) {
  if (values_.size() != grid_.size()) {
    throw InvalidArgument("wave field: expected " + std::to_string(grid_.size()) +
                          " samples, got " + std::to_string(values_.size()));
  }
  if (!all_finite()) throw InvalidArgument("wave field: non-finite sample");
}

WaveField::WaveField(Grid grid, double time_tag)
    : grid_(std::move(grid)), values_(grid_.size(), complex{0.0, 0.0}), time_tag_(time_tag) {}

double WaveField::max_modulus() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool WaveField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](const complex& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

}  // namespace hydronls
