#pragma once

// File formats: CSV observations in, JSON reports and RCOV binary matrices out.
//
// RCOV layout (little-endian):
//   bytes 0-3   magic "RCOV"
//   bytes 4-7   u32 version (1)
//   bytes 8-11  u32 dimension d
//   bytes 12-15 u32 reserved, zero
//   then d*d float64 values, row-major.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rcov/sample.hpp"
#include "rcov/symmat.hpp"

namespace rcov::io {

inline constexpr std::uint32_t kRcovVersion = 1;

struct CsvOptions {
  bool header = false;
  char delimiter = ',';
};

/// Throws DataError naming the offending row and column (1-based, counting
/// file lines including the header).
SampleMatrix parse_csv(std::string_view text, const CsvOptions& opts = {});
SampleMatrix read_csv(const std::string& path, const CsvOptions& opts = {});

/// Single-column numeric file (e.g. regression responses).
std::vector<double> read_column(const std::string& path, const CsvOptions& opts = {});

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// JSON text with every floating-point value printed with 17 significant
/// digits. Non-finite values become the strings "inf", "-inf", "nan".
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// Reads a number written by dump_json, including the non-finite strings.
double json_to_double(const nlohmann::json& j);

nlohmann::json matrix_to_json(const SymMatrix& m);
SymMatrix matrix_from_json(const nlohmann::json& j);

void write_rcov(const std::string& path, const SymMatrix& m);
std::string encode_rcov(const SymMatrix& m);
SymMatrix decode_rcov(std::string_view bytes);
SymMatrix read_rcov(const std::string& path);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex_digest(std::uint64_t h);

}  // namespace rcov::io
