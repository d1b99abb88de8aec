#pragma once

#include "mazya/dyadic.hpp"
#include "mazya/gridfn.hpp"
#include "mazya/kernel.hpp"
#include "mazya/phi.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mazya {

namespace statement {
inline constexpr const char* main_ratio = "main_ratio";
inline constexpr const char* first_lemma = "first_lemma";
inline constexpr const char* second_lemma = "second_lemma";
inline constexpr const char* main2_partial = "main2_partial";
inline constexpr const char* remainder_partial = "remainder_partial";
inline constexpr const char* median_bound = "median_bound";
inline constexpr const char* local_main2 = "local_main2";
inline constexpr const char* aux_k1 = "aux_k1";
inline constexpr const char* aux_k2 = "aux_k2";
inline constexpr const char* aux_k3 = "aux_k3";
inline constexpr const char* aux_phi1 = "aux_phi1";
inline constexpr const char* necessity_probe = "necessity_probe";
inline constexpr const char* energy_increment = "energy_increment";
inline constexpr const char* telescope = "telescope";
inline constexpr const char* extremize = "extremize";
}  // namespace statement

struct InequalityReport {
  std::string statement;
  std::string kernel_id;
  std::string phi_id;
  std::string f_id;
  std::optional<int> n;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double tail_bound = 0.0;
  std::string verdict;
  std::string notes;
};

/// lhs / rhs, with 0/0 = 0 and x/0 = inf.
double safe_ratio(double lhs, double rhs);
InequalityReport make_report(std::string statement, double lhs, double rhs, double tail = 0.0);

struct VerifyOptions {
  ConvolveMethod method = ConvolveMethod::fast;
  ConvolveOptions convolve;
  /// Finest band used for K_{<=n} sums standing in for K; automatic when
  /// empty.
  std::optional<int> hi;
  /// Levels of the tail extrapolation in the partial-sum statements.
  int extrapolation_levels = 64;
};

/// Finest band used for a grid under these options.
int effective_hi(const GridFunction& f, const VerifyOptions& opts);

struct PhiIntegral {
  /// Exactly 0 when below 1e-12 times magnitude.
  double value = 0.0;
  /// h^d sum |Phi(K*f)| over the output grid.
  double magnitude = 0.0;
  double tail_bound = 0.0;
  int lo = 0;
  int hi = 0;
  bool truncated = false;
  GridSpec output_grid;
};

/// Midpoint integral of Phi(K_range * f) over the extended grid plus a bound
/// on the part beyond it.  Requires zero-mean f.
PhiIntegral phi_integral(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f, const BandRange& range,
                         const VerifyOptions& opts = {});
/// Same, without the zero-mean requirement; the tail bound is infinite when
/// the output box may cut off K_range * f and f has nonzero mean.
PhiIntegral band_phi_integral(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f, const BandRange& range,
                              const VerifyOptions& opts = {});

/// Decay bound for the integral of |Phi(K_{lo..hi} * f)| outside the box
/// [-R_out, R_out]^d.
double far_field_tail(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f, double r_out, int lo);

InequalityReport main_ratio(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f,
                            const VerifyOptions& opts = {});
InequalityReport first_lemma_check(const KernelSpec& spec, const GridFunction& f, const VerifyOptions& opts = {});
InequalityReport second_lemma_check(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f, int n,
                                    const VerifyOptions& opts = {});
/// N defaults to the finest resolved band.
InequalityReport main2_partial(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f,
                               std::optional<int> N = std::nullopt, const VerifyOptions& opts = {});
InequalityReport remainder_partial(const KernelSpec& spec, const GridFunction& f, std::optional<int> N, double p,
                                   const VerifyOptions& opts = {});
InequalityReport median_bound_check(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f, int n,
                                    const VerifyOptions& opts = {});
InequalityReport local_main2_check(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f, int n,
                                   const VerifyOptions& opts = {});
/// 2^n sum_j ||f||_{L1(3^d Q_{n,j})}^{p-1} inf_c int_{3^d Q_{n,j}} |x - c| |f|
/// over all j whose enlarged cube meets supp f.
double local_main2_rhs(const GridFunction& f, int n, double p);

struct AuxOptions {
  std::uint64_t seed = 1;
  int random_samples = 10000;
  /// Quadrature cells per axis for the K2 and K3 integrals.
  Index k2_cells_1d = 4096;
  Index k2_cells_2d = 256;
  Index k3_cells_1d = 16384;
  Index k3_cells_2d = 512;
};

std::vector<InequalityReport> aux_lemma_suite(const KernelSpec& spec, const PhiSpec& phi, const AuxOptions& opts = {});
InequalityReport aux_k1(const KernelSpec& spec, const AuxOptions& opts = {});
/// Requires p = 2.
InequalityReport aux_k2(const KernelSpec& spec, const AuxOptions& opts = {});
/// |K_{<=n}| * |K_{n+1}| (x) by midpoint quadrature over the support of K_{n+1}.
double k2_convolution(const KernelSpec& spec, int n, const Vector& x, Index cells);
InequalityReport aux_k3(const KernelSpec& spec, const AuxOptions& opts = {});
/// int |K_0(x - z) - K_0(x - y)| dx by midpoint quadrature on [-2, 2]^d around z.
double k3_integral(const KernelSpec& spec, const Vector& z, const Vector& y, Index cells);
InequalityReport aux_phi1(const PhiSpec& phi, const AuxOptions& opts = {});

enum class ProbeStatus { diverging, bounded, inconclusive };
const char* to_string(ProbeStatus s);

struct ProbeOptions {
  /// Dipole widths, decreasing.
  std::vector<double> widths{0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
  double separation = 0.5;
  double half_width = 1.0;
  /// Grid cells per dipole width.
  Index cells_per_width = 64;
  double growth_factor = 1.25;
};

struct ProbeResult {
  std::vector<double> widths;
  std::vector<InequalityReport> reports;
  std::vector<double> ratios;
  CancellationResult cancellation;
  ProbeStatus status = ProbeStatus::inconclusive;
  /// Strictly increasing across the last three widths.
  bool increasing = false;
  /// max ratio between successive widths (either direction).
  double max_step_factor = 0.0;
};

/// main_ratio for dipoles of decreasing width, each on its own grid with a
/// fixed number of cells per width.  A cancelling Phi is not an error: the
/// sweep runs and the status is inconclusive.
ProbeResult cancellation_necessity_probe(const KernelSpec& spec, const PhiSpec& phi, const ProbeOptions& probe = {},
                                         const VerifyOptions& opts = {});

}  // namespace mazya
