#pragma once

#include "mazya/gridfn.hpp"
#include "mazya/types.hpp"

#include <functional>
#include <optional>
#include <string>

namespace mazya {

using SphereProfile = std::function<Vector(const Vector&)>;

/// K(x) = |x|^{alpha-d} K~(x/|x|) with K~ : S^{d-1} -> R^ell.
struct KernelSpec {
  int d = 1;
  int ell = 1;
  double alpha = 0.5;
  std::string name = "custom";
  SphereProfile profile;
  /// Asserted Lipschitz constant of the profile on the sphere.
  double lipschitz_bound = 1.0;
  /// sup of |K~| on the sphere.
  double profile_sup = 1.0;

  double p() const { return d / (d - alpha); }

  /// K~(zeta) = zeta, ell = d.
  static KernelSpec identity(int d, double alpha);
  /// d = 1, K~(+-1) = +-1.
  static KernelSpec sign(double alpha);
  /// User profile; profile_sup is estimated by sampling when not given.
  static KernelSpec custom(int d, int ell, double alpha, SphereProfile profile, double lipschitz,
                           std::string name = "custom", std::optional<double> sup = std::nullopt);

  void validate() const;
};

/// Sum of bands K_lo + ... + K_hi; lo empty means -infinity.
struct BandRange {
  std::optional<int> lo;
  int hi = 0;

  static BandRange up_to(int hi) { return {std::nullopt, hi}; }
  static BandRange single(int n) { return {n, n}; }
  static BandRange between(int lo, int hi);

  double inner_radius() const { return std::ldexp(1.0, -hi - 1); }
  std::string label() const;
};

Vector eval_kernel(const KernelSpec& spec, const Vector& x);
/// K_n(x): K(x) on the closed annulus 2^{-n-1} <= |x| <= 2^{-n}, else 0.
Vector eval_band(const KernelSpec& spec, int n, const Vector& x);
Vector eval_band_sum(const KernelSpec& spec, const BandRange& range, const Vector& x);

enum class ConvolveMethod { direct, fast };

struct ConvolveOptions {
  /// Bands below lo_min are dropped when range.lo is -infinity.
  int lo_min = -20;
  /// The output box extends the input box by at most this multiple of R.
  double far_field_factor = 3.0;
  /// Force a common output box (half width); must be a power-of-two
  /// multiple of the input half width.
  std::optional<double> output_half_width;
  /// Bound on output cells times components and on FFT buffer size.
  Index max_cells = Index{1} << 25;
};

/// Cell-averaged kernel weights h^d * avg_{cell} K_range on offsets in
/// [-radius, radius]^d.  Cells crossing a discontinuity sphere are averaged
/// by recursive 4^d sub-cell midpoint refinement to depth 3.
struct KernelStencil {
  int d = 1;
  int ell = 1;
  double cell_size = 0.0;
  Index radius = 0;
  Eigen::ArrayXXd weights;  // ell x (2 radius + 1)^d, row-major offsets
  Index refined_cells = 0;

  Index width() const { return 2 * radius + 1; }
};

KernelStencil build_stencil(const KernelSpec& spec, int lo, int hi, double cell_size, Index radius);

struct Convolution {
  GridFunction out;
  /// Effective band limits after applying lo_min.
  int lo = 0;
  int hi = 0;
  double outer_radius = 0.0;
  /// True when the support of K_range * f may extend past the output box.
  bool truncated = false;
  Index refined_cells = 0;
};

/// Midpoint-rule discretization of K_range * f at the cell centers of the
/// extended output grid.
Convolution convolve_detailed(const KernelSpec& spec, const BandRange& range, const GridFunction& f,
                              ConvolveMethod method = ConvolveMethod::fast, const ConvolveOptions& opts = {});
GridFunction convolve(const KernelSpec& spec, const BandRange& range, const GridFunction& f,
                      ConvolveMethod method = ConvolveMethod::fast, const ConvolveOptions& opts = {});

/// Finest band resolvable on a grid of this cell size: the largest n with
/// h <= 2^{-n-1} / 4.
int finest_resolved_band(double cell_size);

}  // namespace mazya
