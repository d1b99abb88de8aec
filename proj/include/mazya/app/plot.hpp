#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mazya::app {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

/// Line chart on log-log axes; nonpositive or non-finite points are dropped.
std::string render_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<Series>& series);

/// One chart per statement in the report: ratio against dipole width when
/// the f_id carries a width tag, against n otherwise.
std::vector<std::filesystem::path> plot_report(const std::filesystem::path& csv, const std::filesystem::path& out_dir);

}  // namespace mazya::app
