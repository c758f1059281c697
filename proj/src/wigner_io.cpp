#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

#include "qct/error.hpp"
#include "qct/qstate.hpp"

namespace qct {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw InvariantError("FormatError", "truncated QCTW stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

constexpr char kMagic[4] = {'Q', 'C', 'T', 'W'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void write_qctw(std::ostream& out, const WignerGrid& w) {
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(w.n_x));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(w.n_p));
  put_le<double>(out, w.x_min);
  put_le<double>(out, w.dx);
  put_le<double>(out, w.p_min);
  put_le<double>(out, w.dp);
  for (double v : w.values) put_le<double>(out, v);
}

WignerGrid read_qctw(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw InvariantError("FormatError", "bad QCTW magic");
  if (get_le<std::uint32_t>(in) != kVersion) throw InvariantError("FormatError", "unsupported QCTW version");
  const auto nx = get_le<std::uint32_t>(in);
  const auto np = get_le<std::uint32_t>(in);
  const double x_min = get_le<double>(in);
  const double dx = get_le<double>(in);
  const double p_min = get_le<double>(in);
  const double dp = get_le<double>(in);
  WignerGrid w(nx, x_min, dx, np, p_min, dp);
  for (auto& v : w.values) v = get_le<double>(in);
  return w;
}

void write_qctw(const std::filesystem::path& path, const WignerGrid& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvariantError("IoError", "cannot open " + path.string());
  write_qctw(out, w);
  if (!out) throw InvariantError("IoError", "write failed for " + path.string());
}

WignerGrid read_qctw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvariantError("IoError", "cannot open " + path.string());
  return read_qctw(in);
}

void write_wigner_csv(std::ostream& out, const WignerGrid& w) {
  out << "x,p,w\n" << std::setprecision(17);
  for (std::size_t i = 0; i < w.n_x; ++i)
    for (std::size_t j = 0; j < w.n_p; ++j) out << w.x(i) << ',' << w.p(j) << ',' << w(i, j) << '\n';
}

}  // namespace qct
