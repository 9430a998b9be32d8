#pragma once

#include <filesystem>

#include "hydronls/wave_field.hpp"

namespace hydronls {

/// Snapshot file (".wfield"): one line of compact JSON
/// {"half_width":..,"n_dims":..,"points_per_dim":..,"time_tag":..} terminated by
/// '\n', followed by points_per_dim^n_dims interleaved (re, im) little-endian
/// float64 pairs in row-major order.
void write_wfield(const std::filesystem::path& path, const WaveField& field);
WaveField read_wfield(const std::filesystem::path& path);

/// 1D section as CSV columns x,re,im.
void write_field_csv(const std::filesystem::path& path, const WaveField& field);

}  // namespace hydronls
