#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "inlite/error.hpp"
#include "inlite/model.hpp"

namespace inlite {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace

bool is_na(double v) { return std::isnan(v); }

void DataTable::add_column(const std::string& name, std::vector<double> values) {
  if (columns_.count(name)) throw DataError("duplicate column '" + name + "'");
  if (!order_.empty() && values.size() != rows_) {
    throw DataError("column '" + name + "' has " + std::to_string(values.size()) +
                    " rows, expected " + std::to_string(rows_));
  }
  rows_ = values.size();
  order_.push_back(name);
  columns_[name] = std::move(values);
}

const std::vector<double>& DataTable::column(const std::string& name) const {
  const auto it = columns_.find(name);
  if (it == columns_.end()) throw DataError("data has no column '" + name + "'");
  return it->second;
}

DataTable read_csv(std::istream& in) {
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw DataError("data file is empty");
  if (!header.empty() && header[0].size() >= 3 && header[0].compare(0, 3, "\xEF\xBB\xBF") == 0) {
    header[0] = header[0].substr(3);
  }
  std::vector<std::vector<double>> cols(header.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string& f = fields[j];
      if (f.empty() || f == "NA" || f == "NaN" || f == "nan") {
        cols[j].push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw DataError("line " + std::to_string(line_no) + ", column '" + header[j] +
                        "': cannot read '" + f + "' as a number");
      }
      cols[j].push_back(v);
    }
  }
  DataTable table;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j].empty()) throw DataError("empty column name in header");
    table.add_column(header[j], std::move(cols[j]));
  }
  if (table.rows() == 0) throw DataError("data file has a header but no rows");
  return table;
}

DataTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  return read_csv(in);
}

void write_csv(std::ostream& out, const DataTable& table) {
  const auto& names = table.names();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (j) out << ',';
      const double v = table.column(names[j])[i];
      if (is_na(v)) {
        out << "NA";
      } else {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        (void)ec;
        out.write(buf, ptr - buf);
      }
    }
    out << '\n';
  }
}

}  // namespace inlite
