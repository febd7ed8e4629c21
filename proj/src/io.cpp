#include "rcov/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rcov/error.hpp"

namespace rcov::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::string cell_error(std::size_t row, std::size_t col, std::string_view what) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col) + ": " + std::string(what);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffU));
}

std::uint32_t get_u32(std::string_view s, std::size_t off) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + b])) << (8 * b);
  return v;
}

void write_value(std::string& out, const nlohmann::json& j, int indent, int depth) {
  const auto newline = [&](int level) {
    if (indent < 0) return;
    out.push_back('\n');
    out.append(static_cast<std::size_t>(indent * level), ' ');
  };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out.push_back('{');
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out.push_back(',');
        first = false;
        newline(depth + 1);
        out += nlohmann::json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        write_value(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out.push_back('}');
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const nlohmann::json& e) { return e.is_primitive(); });
      out.push_back('[');
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat || indent < 0 ? (indent < 0 ? "," : ", ") : ",";
        first = false;
        if (!flat) newline(depth + 1);
        write_value(out, e, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out.push_back(']');
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isnan(v)) {
        out += "\"nan\"";
      } else if (std::isinf(v)) {
        out += v > 0 ? "\"inf\"" : "\"-inf\"";
      } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
      }
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

SampleMatrix parse_csv(std::string_view text, const CsvOptions& opts) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line_no == 1 && opts.header) continue;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto cells = split(line, opts.delimiter);
    if (cols == 0) cols = cells.size();
    if (cells.size() != cols) {
      throw DataError("row " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                      " columns, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string_view cell = cells[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw DataError(cell_error(line_no, c + 1, "cannot parse '" + std::string(cell) + "' as a number"));
      }
      if (!std::isfinite(v)) throw DataError(cell_error(line_no, c + 1, "non-finite value"));
      values.push_back(v);
    }
    ++rows;
    if (end == text.size()) break;
  }
  if (rows == 0) throw DataError("input contains no observations");
  return SampleMatrix(rows, cols, std::move(values));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw DataError("write failed for " + path);
}

SampleMatrix read_csv(const std::string& path, const CsvOptions& opts) {
  return parse_csv(read_file(path), opts);
}

std::vector<double> read_column(const std::string& path, const CsvOptions& opts) {
  const SampleMatrix m = read_csv(path, opts);
  if (m.dim() != 1) throw DataError(path + ": expected a single column, found " + std::to_string(m.dim()));
  return m.data();
}

std::string dump_json(const nlohmann::json& j, int indent) {
  std::string out;
  write_value(out, j, indent, 0);
  out.push_back('\n');
  return out;
}

double json_to_double(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (s == "nan") return std::nan("");
    throw DataError("expected a number, found string '" + s + "'");
  }
  if (!j.is_number()) throw DataError("expected a number");
  return j.get<double>();
}

nlohmann::json matrix_to_json(const SymMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

SymMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DataError("matrix must be an array of rows");
  const std::size_t d = j.size();
  DenseMatrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    if (!j[i].is_array() || j[i].size() != d) throw DataError("matrix must be square");
    for (std::size_t k = 0; k < d; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = json_to_double(j[i][k]);
    }
  }
  return SymMatrix::from_lower(m);
}

std::string encode_rcov(const SymMatrix& m) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  std::string out = "RCOV";
  put_u32(out, kRcovVersion);
  put_u32(out, static_cast<std::uint32_t>(m.dim()));
  put_u32(out, 0);
  for (std::size_t i = 0; i < m.dim(); ++i) {
    for (std::size_t j = 0; j < m.dim(); ++j) {
      const auto bits = std::bit_cast<std::uint64_t>(m(i, j));
      for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffU));
    }
  }
  return out;
}

SymMatrix decode_rcov(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 4) != "RCOV") throw DataError("not an RCOV file");
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kRcovVersion) throw DataError("unsupported RCOV version " + std::to_string(version));
  const std::size_t d = get_u32(bytes, 8);
  if (bytes.size() != 16 + 8 * d * d) throw DataError("RCOV payload size does not match header");
  DenseMatrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  std::size_t off = 16;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[off + b])) << (8 * b);
      off += 8;
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::bit_cast<double>(bits);
    }
  }
  return SymMatrix::from_lower(m);
}

void write_rcov(const std::string& path, const SymMatrix& m) { write_file(path, encode_rcov(m)); }

SymMatrix read_rcov(const std::string& path) { return decode_rcov(read_file(path)); }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rcov::io
