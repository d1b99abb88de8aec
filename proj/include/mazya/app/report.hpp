#pragma once

#include "mazya/verify.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mazya::app {

inline constexpr const char* csv_header =
    "statement_id,kernel_id,phi_id,f_id,n,lhs,rhs,ratio,tail_bound,verdict,config_digest";

/// %.17g, with inf, -inf and nan spelled out.
std::string format_double(double v);

/// Orders by (statement, f_id, n) with a missing n first; stable otherwise.
void sort_reports(std::vector<InequalityReport>& rows);
bool any_failure(const std::vector<InequalityReport>& rows);

std::string to_csv(const std::vector<InequalityReport>& rows, const std::string& digest);
void write_csv(const std::filesystem::path& path, const std::vector<InequalityReport>& rows, const std::string& digest);

struct CsvRow {
  std::string statement, kernel_id, phi_id, f_id, n;
  double lhs = 0.0, rhs = 0.0, ratio = 0.0, tail_bound = 0.0;
  std::string verdict, digest;
};

std::vector<CsvRow> read_csv(const std::filesystem::path& path);

}  // namespace mazya::app
