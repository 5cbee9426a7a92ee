// io.hpp
// CSV and JSON output with 17 significant digits, and series CSV input.

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ios>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace qwalk {

using Json = nlohmann::ordered_json;

// File-system failures. Maps to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_number(double v) { return fmt::format("{:.17g}", v); }

// Serialises with every floating-point value at 17 significant digits.
inline void write_json(std::ostream& os, const Json& j, int indent = 0) {
  const std::string pad(indent, ' ');
  const std::string inner(indent + 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << inner << Json(k).dump() << ": ";
        write_json(os, v, indent + 2);
      }
      os << '\n' << pad << '}';
      break;
    }
    case Json::value_t::array: {
      os << '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ", ";
        first = false;
        write_json(os, v, indent + 2);
      }
      os << ']';
      break;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      os << (std::isfinite(v) ? format_number(v) : std::string("null"));
      break;
    }
    default:
      os << j.dump();
  }
}

inline std::string to_json_text(const Json& j) {
  std::ostringstream os;
  write_json(os, j);
  os << '\n';
  return os.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// Minimal CSV table: header row plus rows of cells.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row_strings(header); }

  template <typename... Cells>
  void row(const Cells&... cells) {
    static_assert(sizeof...(Cells) > 0);
    if (sizeof...(Cells) != columns_) throw std::logic_error("csv row width mismatch");
    bool first = true;
    ((text_ << (first ? "" : ","), text_ << cell(cells), first = false), ...);
    text_ << '\n';
  }

  std::string text() const { return text_.str(); }

 private:
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text_ << (i ? "," : "") << cells[i];
    text_ << '\n';
  }
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::size_t columns_;
  std::ostringstream text_;
};

struct SeriesTable {
  std::vector<double> t;
  std::vector<double> sigma;
  std::vector<int> realizations;  // empty when the column is absent
};

// Reads a series CSV with columns t and sigma_mean (or sigma). Other columns
// are ignored. Missing or non-numeric sigma cells are kept as NaN so the
// fitter can reject them when they fall inside the window.
inline SeriesTable read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("'" + path.string() + "' is empty");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string c;
    while (std::getline(ss, c, ',')) {
      while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
      out.push_back(c);
    }
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  const auto header = split(line);
  int ti = -1, si = -1, ni = -1;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    if (header[i] == "t") ti = i;
    if (header[i] == "sigma_mean" || (header[i] == "sigma" && si < 0)) si = i;
    if (header[i] == "n_realizations") ni = i;
  }
  if (ti < 0 || si < 0)
    throw std::invalid_argument("'" + path.string() + "': header needs columns 't' and 'sigma_mean'");
  SeriesTable table;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    auto number = [&](int idx) {
      if (idx >= static_cast<int>(cells.size()) || cells[idx].empty()) return std::nan("");
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[idx], &used);
        return used == cells[idx].size() ? v : std::nan("");
      } catch (const std::exception&) {
        return std::nan("");
      }
    };
    const double t = number(ti);
    if (std::isnan(t)) throw std::invalid_argument("'" + path.string() + "': bad t value in row '" + line + "'");
    table.t.push_back(t);
    table.sigma.push_back(number(si));
    if (ni >= 0) {
      const double n = number(ni);
      table.realizations.push_back(std::isnan(n) ? 0 : static_cast<int>(n));
    }
  }
  return table;
}

}  // namespace qwalk
