#include "mazya/app/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mazya::app {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void sort_reports(std::vector<InequalityReport>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const InequalityReport& a, const InequalityReport& b) {
    if (a.statement != b.statement) return a.statement < b.statement;
    if (a.f_id != b.f_id) return a.f_id < b.f_id;
    // nullopt orders first
    return a.n < b.n;
  });
}

bool any_failure(const std::vector<InequalityReport>& rows) {
  return std::any_of(rows.begin(), rows.end(), [](const InequalityReport& r) { return r.verdict == "fail" || r.verdict == "fails"; });
}

namespace {

std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number");
  return v;
}

}  // namespace

std::string to_csv(const std::vector<InequalityReport>& rows, const std::string& digest) {
  std::string out = std::string(csv_header) + "\n";
  for (const InequalityReport& r : rows) {
    out += field(r.statement) + ',' + field(r.kernel_id) + ',' + field(r.phi_id) + ',' + field(r.f_id) + ',' +
           (r.n ? std::to_string(*r.n) : std::string()) + ',' + format_double(r.lhs) + ',' + format_double(r.rhs) + ',' +
           format_double(r.ratio) + ',' + format_double(r.tail_bound) + ',' + field(r.verdict) + ',' + digest + '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<InequalityReport>& rows, const std::string& digest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << to_csv(rows, digest);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<CsvRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || split_line(line) != split_line(csv_header))
    throw std::runtime_error("'" + path.string() + "' is not a report CSV");
  std::vector<CsvRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_line(line);
    if (f.size() != 11) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected 11 fields");
    CsvRow r;
    try {
      r = {f[0], f[1], f[2], f[3], f[4], parse_double(f[5]), parse_double(f[6]), parse_double(f[7]), parse_double(f[8]), f[9], f[10]};
    } catch (const std::exception&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": malformed number");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace mazya::app
