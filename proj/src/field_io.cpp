#include "heatplan/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace heatplan::io {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(std::string_view bytes, std::size_t at, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  return v;
}

}  // namespace

std::string encode_field(const FieldDump& dump) {
  const std::size_t n = static_cast<std::size_t>(dump.width) * dump.height * dump.channels;
  if (dump.values.size() != n) throw InvalidArgument("encode_field: value count does not match header");
  std::string out = "HKF1";
  out.reserve(16 + 8 * n);
  put_u32(out, dump.width);
  put_u32(out, dump.height);
  put_u32(out, dump.channels);
  for (double v : dump.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

FieldDump decode_field(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 4) != "HKF1") throw ParseError("not an HKF1 field dump", 0);
  FieldDump d;
  d.width = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
  d.height = static_cast<std::uint32_t>(get_le(bytes, 8, 4));
  d.channels = static_cast<std::uint32_t>(get_le(bytes, 12, 4));
  const std::size_t n = static_cast<std::size_t>(d.width) * d.height * d.channels;
  if (bytes.size() != 16 + 8 * n) throw ParseError("HKF1 payload size does not match header", bytes.size());
  d.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.values[i] = std::bit_cast<double>(get_le(bytes, 16 + 8 * i, 8));
  return d;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error("error reading '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("error writing '" + path + "'");
}

}  // namespace heatplan::io
