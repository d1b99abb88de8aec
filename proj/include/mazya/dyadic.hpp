#pragma once

#include "mazya/gridfn.hpp"
#include "mazya/types.hpp"

#include <stdexcept>
#include <vector>

namespace mazya {

/// Closed axis-aligned cube corner + [0, side]^d.
struct Cube {
  Vector corner;
  double side = 1.0;

  int dim() const { return static_cast<int>(corner.size()); }
  Vector center() const { return corner.array() + 0.5 * side; }
  double diameter() const { return side * std::sqrt(static_cast<double>(dim())); }
  /// The cube with the same center and lambda times the side.
  Cube dilated(double lambda) const;
  bool contains(const Vector& x) const;

  static Cube unit(int d) { return {Vector::Zero(d), 1.0}; }
};

/// Q_{k,j} inside a root cube: corner root.corner + 2^{-k} side j.
struct DyadicCube {
  Cube root;
  int generation = 0;
  IndexVector index;

  static DyadicCube of(const Cube& root) { return {root, 0, IndexVector::Zero(root.dim())}; }

  double side() const { return std::ldexp(root.side, -generation); }
  Cube cube() const;
};

/// Children in lexicographic index order.
std::vector<DyadicCube> children(const DyadicCube& q);
/// All generation-n descendants of q, lexicographic order (first axis
/// slowest).
std::vector<DyadicCube> cubes_at(const DyadicCube& q, int n);

/// Per-subcube masses int_{Q'} |f| for all generations 0..depth of a cube
/// aligned with the cell boundaries of f's grid.  Cells outside the grid box
/// count as zero.
class MassTree {
 public:
  MassTree(const GridFunction& f, const Cube& q, int depth);

  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  int dim() const { return d_; }
  const Cube& root() const { return root_; }
  /// Masses of generation n, lexicographic (row-major) order.
  const Eigen::ArrayXd& masses(int n) const { return levels_.at(static_cast<std::size_t>(n)); }
  double mass(int n, const IndexVector& j) const;
  /// int_Q |f| summed directly over the grid cells, independent of the tree.
  double total() const { return total_; }

 private:
  int d_;
  Cube root_;
  std::vector<Eigen::ArrayXd> levels_;
  double total_ = 0.0;
};

/// E_{Q,n}[f] = sum over generation-n subcubes of (mass)^p.
double energy(const MassTree& tree, int n, double p);
double energy(const GridFunction& f, const Cube& q, int n, double p);

struct TelescopeResult {
  std::vector<double> energies;    // E_0 .. E_N
  std::vector<double> increments;  // E_n - E_{n+1}
  std::vector<double> partial_sums;
  double norm_power = 0.0;  // ||f||_{L1(Q)}^p
  /// |(||f||^p - E_N) - sum of increments| / ||f||^p.
  double defect = 0.0;
  /// min_n increment / ||f||^p.
  double min_increment = 0.0;

  bool ok(double tol = 1e-12) const { return defect <= tol && min_increment >= -tol; }
};

TelescopeResult telescope_check(const GridFunction& f, const Cube& q, double p, int depth);

/// min(x^{p-1} y, x y^{p-1}) for p in (1, 2]; the product x y at p = 2.
template <typename Scalar>
Scalar m_p(double p, Scalar x, Scalar y) {
  using std::pow;
  if (!(p > 1.0 && p <= 2.0)) throw std::invalid_argument("m_p: requires 1 < p <= 2");
  if (x < Scalar(0) || y < Scalar(0)) throw std::invalid_argument("m_p: arguments must be nonnegative");
  if (p == 2.0) return x * y;
  if (x == Scalar(0) || y == Scalar(0)) return Scalar(0);
  return std::min(pow(x, p - 1.0) * y, x * pow(y, p - 1.0));
}

/// x^{p-1} y + x y^{p-1}, the replacement for p > 2.
template <typename Scalar>
Scalar m_p_highp(double p, Scalar x, Scalar y) {
  using std::pow;
  if (!(p > 2.0)) throw std::invalid_argument("m_p_highp: requires p > 2");
  if (x < Scalar(0) || y < Scalar(0)) throw std::invalid_argument("m_p_highp: arguments must be nonnegative");
  return pow(x, p - 1.0) * y + x * pow(y, p - 1.0);
}

/// m_p for p <= 2, m_p_highp above.
template <typename Scalar>
Scalar m_p_any(double p, Scalar x, Scalar y) {
  return p > 2.0 ? m_p_highp(p, x, y) : m_p(p, x, y);
}

/// theta(t) = min(t, t^{p-1}), t >= 0; M_p(x, y) = x^p theta(y / x).
inline double theta(double p, double t) { return t <= 0.0 ? 0.0 : std::min(t, std::pow(t, p - 1.0)); }

struct GreedyChain {
  std::vector<DyadicCube> cubes;  // R_0 = Q, R_1, ...
  std::vector<double> masses;
  Vector c0;
  /// diam(R_depth) * ||f||_{L1(Q)}, bound on the first-moment error of using c0.
  double moment_error_bound = 0.0;
  /// Levels where the chosen child keeps at least (1 - delta) of the parent mass.
  int concentrated_levels = 0;
};

/// Default delta solving 2 (1 - delta)^{p-1} = 1.02.
double greedy_delta(double p);

GreedyChain greedy_chain(const GridFunction& f, const Cube& q, int depth, double delta = -1.0);

struct IncrementCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double moment = 0.0;
  std::vector<double> energies;
};

/// lhs = ||f||^{p-1} inf_c int |x - c| |f| / l(Q), rhs = sum_{n<depth}
/// (1 - eps)^n (E_n - E_{n+1}); ratio 0 when both vanish.
IncrementCheck energy_increment_lemma_check(const GridFunction& f, const Cube& q, double p, int depth,
                                            double eps = 0.49);

struct LatticeCover {
  std::vector<Cube> cubes;
  /// Dilation factor F of the covered cubes: 3, or 3^d when iterated.
  int factor = 3;
  /// Side of each cover cube over l(Q).
  double size_ratio = 0.0;
  int verified_depth = 0;
  long long checked = 0;
  long long failures = 0;

  bool verified() const { return failures == 0; }
};

/// Shifted dyadic lattices such that F R is dyadic in one of them for every
/// R in D(Q).  Verified exhaustively with integer arithmetic to verify_depth.
LatticeCover three_lattice_cover(const Cube& q, bool iterated, int verify_depth = 6);
/// Exhaustive membership check of an arbitrary cover.
long long lattice_cover_failures(const LatticeCover& cover, const Cube& q, int depth, long long* checked = nullptr);

struct EnergyBoundResult {
  double p = 2.0;
  int n = 2;
  int resolution = 64;
  double infimum = 0.0;
  std::vector<double> argmin;
  long long points = 0;
};

/// inf over the simplex grid {sum z = 1, z_i in N / resolution} of
/// [(sum z)^p - sum z^p] / [(sum z)^{p-1} min_j sum_{i != j} z_i].
EnergyBoundResult energy_bound_infimum(double p, int n, int resolution = 64);
/// Same grid, denominator M_p(sum_A z, sum_{not A} z), minimized over all
/// proper nonempty subsets A as well.
EnergyBoundResult energy_bound2_infimum(double p, int n, int resolution = 64);

struct MpProperties {
  double p = 2.0;
  long long samples = 0;
  double symmetry_defect = 0.0;
  double homogeneity_defect = 0.0;
  /// max (M_p(x, l y) - l^{p-1} M_p(x, y)) / M_p(x, y) over l < 1.
  double scaling_excess = 0.0;
  double subadditivity_constant = 0.0;
  /// The same constant computed through theta.
  double theta_constant = 0.0;
  double theta_defect = 0.0;
  /// max relative second difference in y (<= 0 for concave).
  double concavity_excess = 0.0;
  double lipschitz_ratio = 0.0;
  double lipschitz_limit = 0.0;

  bool passes(double tol = 1e-12) const;
};

MpProperties measure_mp_properties(double p, long long samples, std::uint64_t seed);

}  // namespace mazya
