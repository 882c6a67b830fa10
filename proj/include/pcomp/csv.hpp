// CSV traces: "# key=value" metadata lines, one header row, data rows.
// Numbers use the shortest representation that round-trips.

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pcomp::csv {

inline std::string format_number(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return {buf, end};
}

inline double parse_number(std::string_view s) {
  double x = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || end != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return x;
}

/// 64-bit FNV-1a, used to fingerprint run configurations.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, x >>= 4) s[static_cast<std::size_t>(i)] = digits[x & 0xF];
  return s;
}

using Meta = std::vector<std::pair<std::string, std::string>>;

class Writer {
 public:
  Writer(std::ostream& out, std::vector<std::string> header, const Meta& meta = {}, char sep = ',')
      : out_(out), columns_(header.size()), sep_(sep) {
    if (sep_ == ',')
      for (const auto& [k, v] : meta) out_ << "# " << k << '=' << v << '\n';
    write_fields(header);
  }

  void row(const std::vector<std::string>& fields) {
    if (fields.size() != columns_)
      throw std::invalid_argument("row has " + std::to_string(fields.size()) + " fields, header has " +
                                  std::to_string(columns_));
    write_fields(fields);
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> fields;
    fields.reserve(values.size());
    for (double v : values) fields.push_back(format_number(v));
    row(fields);
  }

 private:
  void write_fields(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? std::string(1, sep_) : "") << fields[i];
    out_ << '\n';
    if (!out_) throw std::runtime_error("write failed");
  }

  std::ostream& out_;
  std::size_t columns_;
  char sep_;
};

struct Table {
  Meta meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::out_of_range("no column '" + std::string(name) + "'");
  }

  std::string meta_value(std::string_view key) const {
    for (const auto& [k, v] : meta)
      if (k == key) return v;
    throw std::out_of_range("no metadata '" + std::string(key) + "'");
  }
};

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ls(line);
  while (std::getline(ls, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline Table read(std::istream& in) {
  Table t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) t.meta.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (line.empty()) continue;
    auto fields = split(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != t.header.size())
        throw std::runtime_error("CSV row with " + std::to_string(fields.size()) + " fields under a " +
                                 std::to_string(t.header.size()) + "-column header");
      t.rows.push_back(std::move(fields));
    }
  }
  return t;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  return read(in);
}

/// Data rows only (metadata and blank lines dropped), for determinism checks.
inline std::string data_rows(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') out += line + '\n';
  return out;
}

}  // namespace pcomp::csv
