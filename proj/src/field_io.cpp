#include "hydronls/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include "json.hpp"
#include <string>

#include "hydronls/error.hpp"
#include "hydronls/text_io.hpp"

namespace hydronls {
namespace {

static_assert(sizeof(double) == 8);

void put_le(std::ostream& os, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_le(const unsigned char* bytes) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_wfield(const std::filesystem::path& path, const WaveField& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot open " + path.string() + " for writing");
  const Grid& g = field.grid();
  nlohmann::json header = {{"n_dims", g.n_dims()},
                           {"points_per_dim", g.points_per_dim()},
                           {"half_width", g.half_width()},
                           {"time_tag", field.time_tag()}};
  os << header.dump() << '\n';
  for (const auto& v : field.values()) {
    put_le(os, v.real());
    put_le(os, v.imag());
  }
  if (!os) throw InvalidArgument("write failed for " + path.string());
}

WaveField read_wfield(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument(path.string() + ": missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(path.string() + ": bad header: " + e.what());
  }
  for (const char* key : {"n_dims", "points_per_dim", "half_width", "time_tag"}) {
    if (!header.contains(key)) throw InvalidArgument(path.string() + ": header lacks " + key);
  }
  Grid grid(header["n_dims"].get<int>(), header["points_per_dim"].get<int>(),
            header["half_width"].get<double>());
  std::vector<unsigned char> payload(grid.size() * 16);
  is.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (is.gcount() != static_cast<std::streamsize>(payload.size())) {
    throw InvalidArgument(path.string() + ": truncated payload");
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw InvalidArgument(path.string() + ": trailing bytes after payload");
  }
  std::vector<complex> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = {get_le(&payload[16 * i]), get_le(&payload[16 * i + 8])};
  }
  return WaveField(std::move(grid), std::move(values), header["time_tag"].get<double>());
}

void write_field_csv(const std::filesystem::path& path, const WaveField& field) {
  const Grid& g = field.grid();
  if (g.n_dims() != 1) throw InvalidArgument("csv export is defined for 1D fields only");
  CsvWriter csv(path, {"x", "re", "im"});
  const auto x = g.coordinates();
  const auto v = field.values();
  for (std::size_t i = 0; i < v.size(); ++i) csv.row({x[i], v[i].real(), v[i].imag()});
}

}  // namespace hydronls
