#include "mazya/app/plot.hpp"

#include "mazya/app/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <stdexcept>

namespace mazya::app {

namespace {

constexpr double width_px = 640, height_px = 420;
constexpr double left = 70, right = 160, top = 40, bottom = 50;

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Range {
  double lo = 0, hi = 1;
};

Range log_range(const std::vector<Series>& series, bool use_x) {
  double lo = INFINITY, hi = -INFINITY;
  for (const Series& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0 && s.y[i] > 0 && std::isfinite(s.x[i]) && std::isfinite(s.y[i]))) continue;
      const double v = std::log10(use_x ? s.x[i] : s.y[i]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!(lo <= hi)) return {0, 1};
  lo = std::floor(lo);
  hi = std::ceil(hi);
  if (hi - lo < 1) hi = lo + 1;
  return {lo, hi};
}

}  // namespace

std::string render_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<Series>& series) {
  const Range rx = log_range(series, true), ry = log_range(series, false);
  const double pw = width_px - left - right, ph = height_px - top - bottom;
  auto sx = [&](double x) { return left + (std::log10(x) - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto sy = [&](double y) { return top + ph - (std::log10(y) - ry.lo) / (ry.hi - ry.lo) * ph; };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_px) + "\" height=\"" + num(height_px) +
                    "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(left) + "\" y=\"20\" font-size=\"14\">" + escape(title) + "</text>\n";
  svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double e = rx.lo; e <= rx.hi + 1e-9; e += 1) {
    const double x = left + (e - rx.lo) / (rx.hi - rx.lo) * pw;
    svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(top) + "\" x2=\"" + num(x) + "\" y2=\"" + num(top + ph) +
           "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(top + ph + 15) + "\" text-anchor=\"middle\">1e" +
           std::to_string(static_cast<int>(e)) + "</text>\n";
  }
  for (double e = ry.lo; e <= ry.hi + 1e-9; e += 1) {
    const double y = top + ph - (e - ry.lo) / (ry.hi - ry.lo) * ph;
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left + pw) + "\" y2=\"" + num(y) +
           "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + num(left - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">1e" +
           std::to_string(static_cast<int>(e)) + "</text>\n";
  }
  svg += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(height_px - 12) + "\" text-anchor=\"middle\">" +
         escape(xlabel) + "</text>\n";
  svg += "<text transform=\"translate(16," + num(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" + escape(ylabel) +
         "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* colour = palette[k % (sizeof palette / sizeof *palette)];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (s.x[i] > 0 && s.y[i] > 0 && std::isfinite(s.x[i]) && std::isfinite(s.y[i])) pts.emplace_back(s.x[i], s.y[i]);
    std::sort(pts.begin(), pts.end());
    std::string path;
    for (const auto& [x, y] : pts) path += (path.empty() ? "" : " ") + num(sx(x)) + "," + num(sy(y));
    if (!pts.empty()) {
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"" + path + "\"/>\n";
      for (const auto& [x, y] : pts)
        svg += "<circle cx=\"" + num(sx(x)) + "\" cy=\"" + num(sy(y)) + "\" r=\"2.5\" fill=\"" + colour + "\"/>\n";
    }
    const double ly = top + 14 + 16 * static_cast<double>(k);
    svg += "<line x1=\"" + num(left + pw + 10) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(left + pw + 28) + "\" y2=\"" +
           num(ly - 4) + "\" stroke=\"" + colour + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(left + pw + 32) + "\" y=\"" + num(ly) + "\">" + escape(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::filesystem::path> plot_report(const std::filesystem::path& csv, const std::filesystem::path& out_dir) {
  const std::vector<CsvRow> rows = read_csv(csv);
  const std::regex width_tag("(.*)_w([0-9]+)(.*)");

  struct Chart {
    bool by_width = false;
    std::map<std::string, Series> series;
  };
  std::map<std::string, Chart> charts;
  for (const CsvRow& r : rows) {
    Chart& c = charts[r.statement];
    std::smatch m;
    double x = 0;
    std::string label;
    if (std::regex_match(r.f_id, m, width_tag) && r.n.empty()) {
      c.by_width = true;
      x = std::ldexp(1.0, -std::stoi(m[2].str()));
      label = m[1].str() + m[3].str();
    } else if (!r.n.empty()) {
      x = std::stoi(r.n) + 1.0;
      label = r.f_id;
    } else {
      continue;
    }
    Series& s = c.series[label];
    s.label = label;
    s.x.push_back(x);
    s.y.push_back(r.ratio);
  }

  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& [statement, chart] : charts) {
    if (chart.series.empty()) continue;
    std::vector<Series> series;
    for (const auto& kv : chart.series) series.push_back(kv.second);
    const std::filesystem::path path = out_dir / (csv.stem().string() + "_" + statement + ".svg");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << render_svg(statement, chart.by_width ? "dipole width" : "n + 1", "ratio", series);
    written.push_back(path);
  }
  return written;
}

}  // namespace mazya::app
