#pragma once

#include "mazya/verify.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mazya {

/// Sums of M B-spline bumps; each bump carries [center (d), log width,
/// weight].  Weights are projected to sum zero and every bump has unit
/// discrete mass, so the realized function has zero integral.
struct FamilySpec {
  int bumps = 2;
  GridSpec grid;
  std::uint64_t seed = 1;
  int restarts = 8;

  int dimension() const { return bumps * (grid.d + 2); }
  double min_width() const { return 8.0 * grid.cell_size(); }
  double max_width() const { return 0.5 * grid.half_width; }
};

/// Clamp widths into [8h, R/2], keep every bump inside the box and project
/// the weights onto the sum-zero hyperplane.
Vector project_parameters(const FamilySpec& family, const Vector& params);
GridFunction realize(const FamilySpec& family, const Vector& params);
/// The symmetric dipole: +1 and -1 bumps at -+R/4 on the first axis, width
/// R/16, extra bumps with weight 0.
Vector baseline_parameters(const FamilySpec& family);

struct SearchResult {
  Vector best_params;
  double best_ratio = 0.0;
  double baseline_ratio = 0.0;
  long long evaluations = 0;
  int restarts = 0;
  int best_restart = 0;
  /// Best-so-far ratio after each evaluation, restarts concatenated in order.
  std::vector<double> trace;
};

struct SearchOptions {
  long long budget = 500;
  int threads = 1;
  VerifyOptions verify;
};

/// Restarted Nelder-Mead maximization of main_ratio over the family.
SearchResult search(const KernelSpec& spec, const PhiSpec& phi, const FamilySpec& family, const SearchOptions& opts);

struct TableEntry {
  std::string id;
  KernelSpec kernel;
  PhiSpec phi;
  FamilySpec family;
};

struct TableRow {
  std::string id;
  std::string kernel_id;
  std::string phi_id;
  double best_ratio = 0.0;
  double baseline_ratio = 0.0;
  long long evaluations = 0;
};

/// One search per entry, rows sorted by id.
std::vector<TableRow> constant_table(const std::vector<TableEntry>& entries, const SearchOptions& opts);

}  // namespace mazya
