#pragma once

// CSV dialect shared by every output table: comma separated, '.' decimal,
// %.16e numbers, '#'-prefixed metadata lines, one header row.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "casimir/units.hpp"

namespace casimir::io {

inline constexpr const char* kVersion = "0.1.0";

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Metadata {
  std::string generator;  // subcommand name
  bool timestamp = true;
  std::vector<std::pair<std::string, std::string>> extra;
};

inline void write_metadata(std::ostream& os, const Metadata& m) {
  os << "# generator: casimir " << kVersion << " " << m.generator << "\n";
  if (m.timestamp) os << "# timestamp: " << utc_timestamp() << "\n";
  os << "# constants: hbar=" << format_double(units::hbar) << " J s, c=" << format_double(units::speed_of_light)
     << " m/s, k_B=" << format_double(units::boltzmann) << " J/K, eV=" << format_double(units::electron_volt)
     << " J\n";
  for (const auto& [k, v] : m.extra) os << "# " << k << ": " << v << "\n";
}

inline void write_header(std::ostream& os, std::span<const std::string> columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << "\n";
}

inline void write_row(std::ostream& os, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << format_double(values[i]);
  os << "\n";
}

}  // namespace casimir::io
