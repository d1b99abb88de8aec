#pragma once

#include "mazya/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mazya {

/// Cell-centered uniform grid on [-R, R]^d.  Both R and the number of cells
/// per axis are powers of two, so every dyadic cube of side >= h is a union
/// of cells.
struct GridSpec {
  int d = 1;
  double half_width = 1.0;
  Index cells_per_axis = 1024;

  double cell_size() const { return 2.0 * half_width / static_cast<double>(cells_per_axis); }
  double cell_volume() const { return std::pow(cell_size(), d); }
  Index cell_count() const;
  double coordinate(Index i) const { return -half_width + (static_cast<double>(i) + 0.5) * cell_size(); }

  IndexVector unravel(Index linear) const;
  Index ravel(const IndexVector& multi) const;
  Vector center(Index linear) const;

  /// Throws std::invalid_argument unless the layout invariants hold.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

/// Samples of an R^components-valued function at cell centers.  Column c of
/// `values` is the value at the cell with linear (row-major) index c.
struct GridFunction {
  GridSpec grid;
  int components = 1;
  Eigen::ArrayXXd values;

  GridFunction() = default;
  GridFunction(const GridSpec& g, int comps);

  Index cells() const { return values.cols(); }
  /// Scalar view for single-component functions.
  double& operator[](Index cell) { return values(0, cell); }
  double operator[](Index cell) const { return values(0, cell); }

  GridFunction operator*(double s) const;
  GridFunction operator+(const GridFunction& o) const;
  GridFunction operator-(const GridFunction& o) const;
};

/// Point masses |f(x_i)| h^d at cell centers; the sparse form used by moment
/// computations.
struct MassPoints {
  Eigen::MatrixXd positions;  // d x m
  Eigen::VectorXd masses;     // m, nonnegative

  Index size() const { return masses.size(); }
  double total() const { return masses.sum(); }
};

MassPoints mass_points(const GridFunction& f);
/// Mass points of f restricted to the closed box [lo, hi] (cell centers).
MassPoints mass_points_in_box(const GridFunction& f, const Vector& lo, const Vector& hi);

double l1_norm(const GridFunction& f);
double integral(const GridFunction& f);
/// Largest |integral| tolerated for a function called zero-mean.
bool is_zero_mean(const GridFunction& f, double rel_tol = 1e-12);

GridFunction project_zero_mean(const GridFunction& f);

double first_moment(const GridFunction& f, const Vector& c);
double first_moment(const MassPoints& m, const Vector& c);

struct MomentMinimum {
  Vector center;
  double value = 0.0;
  /// Objective at the weighted-median initializer; value <= initial_value.
  double initial_value = 0.0;
};

/// Approximate argmin over c of the first moment: coordinate-wise weighted
/// median of |f|, then single-axis moves between neighbouring cell centers.
MomentMinimum min_first_moment(const GridFunction& f);
MomentMinimum min_first_moment(const MassPoints& m, double step);

/// Tensor cubic B-spline bump of knot spacing w, supported on [-2w, 2w]^d,
/// unit integral.
double bspline_bump(const Vector& x, double width);
/// Bump sampled on the grid and normalized to unit discrete mass.
GridFunction make_bump(const GridSpec& grid, const Vector& center, double width);

struct DipoleSpec {
  Vector origin;  // first pole; empty means 0
  Vector z;       // second pole is origin + z
  double width = 0.125;
};

/// Mollified realization of delta_origin - delta_{origin+z}.
GridFunction make_dipole(const DipoleSpec& spec, const GridSpec& grid);
GridFunction make_random_bumps(int count, std::uint64_t seed, const GridSpec& grid);

/// L1-preserving dilation f_n(x) = 2^{nd} f(2^n x), realized on the grid
/// scaled by 2^{-n}.
GridFunction dilate(const GridFunction& f, int n);
/// Shift by whole cells; throws if nonzero values would leave the box.
GridFunction translate(const GridFunction& f, const IndexVector& shift);

/// Bounding box of the cells where f is nonzero (cell centers).
struct SupportBox {
  Vector lo, hi;
  bool empty = true;
};
SupportBox support_box(const GridFunction& f);

/// Flat little-endian binary layout: int64 d, int64 components,
/// int64 cells_per_axis, float64 R, then float64 values with the cell index
/// in row-major order and the component index fastest.  A JSON sidecar
/// `<path>.json` repeats the metadata.
void write_grid_function(const std::filesystem::path& path, const GridFunction& f);
GridFunction read_grid_function(const std::filesystem::path& path);

}  // namespace mazya
