#include "reachkit/field_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "reachkit/errors.hpp"

namespace reachkit {

namespace {

constexpr std::array<char, 8> kMagic = {'V', 'F', 'L', 'D', '\0', '\0', '\0', '\1'};
constexpr std::size_t kHeaderBytes = 8 + 3 * (8 + 8 + 8 + 1);

void put_u64(std::vector<char>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_f64(std::vector<char>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  return v;
}

double get_f64(const char* p) { return std::bit_cast<double>(get_u64(p)); }

std::vector<char> encode_header(const Grid3& grid) {
  std::vector<char> out(kMagic.begin(), kMagic.end());
  for (const auto& a : grid.axes()) {
    put_f64(out, a.lo);
    put_f64(out, a.hi);
    put_u64(out, a.count);
    out.push_back(a.periodic ? 1 : 0);
  }
  return out;
}

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Grid3 decode_header(const std::vector<char>& bytes, const std::filesystem::path& path) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw FormatError(path.string() + ": not a VFLD file");
  }
  std::array<AxisSpec, 3> axes;
  const char* p = bytes.data() + kMagic.size();
  for (auto& a : axes) {
    a.lo = get_f64(p);
    a.hi = get_f64(p + 8);
    a.count = get_u64(p + 16);
    a.periodic = p[24] != 0;
    p += 25;
  }
  try {
    return Grid3(axes[0], axes[1], axes[2]);
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": bad grid header: " + e.what());
  }
}

void dump(const std::filesystem::path& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write to " + path.string());
}

}  // namespace

void write_field(const std::filesystem::path& path, const ScalarField& field) {
  auto bytes = encode_header(field.grid());
  bytes.reserve(bytes.size() + 8 * field.size());
  for (double v : field.values()) put_f64(bytes, v);
  dump(path, bytes);
}

ScalarField read_field(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  Grid3 grid = decode_header(bytes, path);
  if (bytes.size() != kHeaderBytes + 8 * grid.size()) {
    throw FormatError(path.string() + ": payload is not an f64 field of the declared grid");
  }
  std::vector<double> values(grid.size());
  const char* p = bytes.data() + kHeaderBytes;
  for (std::size_t n = 0; n < values.size(); ++n) values[n] = get_f64(p + 8 * n);
  return ScalarField(std::move(grid), std::move(values));
}

void write_mask(const std::filesystem::path& path, const BoolMask& mask) {
  auto bytes = encode_header(mask.grid());
  for (auto b : mask.bits()) bytes.push_back(static_cast<char>(b));
  dump(path, bytes);
}

BoolMask read_mask(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  Grid3 grid = decode_header(bytes, path);
  if (bytes.size() != kHeaderBytes + grid.size()) {
    throw FormatError(path.string() + ": payload is not a byte mask of the declared grid");
  }
  std::vector<std::uint8_t> bits(bytes.begin() + static_cast<std::ptrdiff_t>(kHeaderBytes), bytes.end());
  return BoolMask(std::move(grid), std::move(bits));
}

Grid3 read_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<char> head(kHeaderBytes);
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  return decode_header(head, path);
}

}  // namespace reachkit
