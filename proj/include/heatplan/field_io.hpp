#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "heatplan/common.hpp"

namespace heatplan::io {

// "HKF1", LE u32 width, height, channels, then LE f64 values, row-major, channel-minor.
struct FieldDump {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 1;
  std::vector<double> values;
};

std::string encode_field(const FieldDump& dump);
FieldDump decode_field(std::string_view bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace heatplan::io
