#pragma once

#include "mazya/kernel.hpp"
#include "mazya/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mazya {

enum class PhiFamily {
  signed_power,       // R -> R, t |t|^{p-1}
  abs_power,          // |v|^p, never cancels
  quadratic_form,     // R^2 -> R, a11 v1^2 + a12 v1 v2 + a22 v2^2, p = 2
  norm_power_signed,  // |v|^{p-1} <v, u>
  custom
};

/// Positively p-homogeneous functional on R^ell.
struct PhiSpec {
  int ell = 1;
  double p = 2.0;
  PhiFamily family = PhiFamily::signed_power;
  double a11 = 0.0, a12 = 0.0, a22 = 0.0;
  Vector direction;
  std::function<double(const Vector&)> evaluator;
  double lipschitz_bound = 1.0;
  std::string name;

  static PhiSpec signed_power(double p);
  static PhiSpec abs_power(int ell, double p);
  static PhiSpec quadratic_form(double a11, double a12, double a22);
  static PhiSpec norm_power_signed(const Vector& u, double p);
  /// Custom evaluators declare p; homogeneity is checked here and a
  /// std::invalid_argument is thrown when it fails.
  static PhiSpec custom(int ell, double p, std::function<double(const Vector&)> fn, double lipschitz,
                        std::string name = "custom");

  /// max |Phi| on the unit sphere of R^ell (exact for built-ins).
  double sphere_sup() const;
};

template <typename Derived>
double eval_phi(const PhiSpec& phi, const Eigen::MatrixBase<Derived>& v) {
  using std::abs;
  using std::pow;
  switch (phi.family) {
    case PhiFamily::signed_power: {
      const double t = v(0);
      return t == 0.0 ? 0.0 : t * pow(abs(t), phi.p - 1.0);
    }
    case PhiFamily::abs_power: {
      const double r = v.norm();
      return phi.p == 2.0 ? r * r : pow(r, phi.p);
    }
    case PhiFamily::quadratic_form:
      return phi.a11 * v(0) * v(0) + phi.a12 * v(0) * v(1) + phi.a22 * v(1) * v(1);
    case PhiFamily::norm_power_signed: {
      const double r = v.norm();
      return r == 0.0 ? 0.0 : pow(r, phi.p - 1.0) * v.dot(phi.direction);
    }
    case PhiFamily::custom:
      return phi.evaluator(Vector(v));
  }
  return 0.0;
}

/// Largest relative defect |Phi(tv) - t^p Phi(v)| / (t^p |v|^p sup|Phi|) over
/// seeded samples with t in [1/8, 8].
double check_homogeneity(const PhiSpec& phi, int samples, std::uint64_t seed);

enum class QuadratureScheme { two_point, uniform_circle, product_angles, monte_carlo };

struct SphereQuadrature {
  int d = 1;
  QuadratureScheme scheme = QuadratureScheme::two_point;
  Eigen::MatrixXd nodes;  // d x n
  Eigen::VectorXd weights;
  std::vector<int> counts;
  std::uint64_t seed = 0;

  Index size() const { return weights.size(); }

  static SphereQuadrature two_point();
  static SphereQuadrature uniform_circle(int n);
  /// counts = {azimuthal, polar_1, ..., polar_{d-2}}; polar angles use
  /// Gauss-Gegenbauer nodes.
  static SphereQuadrature product_angles(int d, const std::vector<int>& counts);
  static SphereQuadrature monte_carlo(int d, int samples, std::uint64_t seed);
  /// Scheme defaults: two-point, 256-node circle, (32, 16) product rule in
  /// d = 3, Monte Carlo with 2^16 samples above.
  static SphereQuadrature default_for(int d);

  /// The same scheme at roughly half resolution, used for error estimates.
  SphereQuadrature coarsened() const;
};

template <typename F>
double sphere_integrate(const SphereQuadrature& quad, F&& g) {
  double s = 0.0;
  for (Index i = 0; i < quad.size(); ++i) s += quad.weights[i] * g(Vector(quad.nodes.col(i)));
  return s;
}

struct QuadratureEstimate {
  double value = 0.0;
  /// |Q - Q_coarse| for deterministic rules, 3 standard errors for Monte Carlo.
  double error = 0.0;
};

QuadratureEstimate sphere_integrate_with_error(const SphereQuadrature& quad, const std::function<double(const Vector&)>& g);

/// Gauss nodes and weights for the weight (1 - t^2)^{lambda - 1/2} on [-1, 1]
/// via the Golub-Welsch eigenvalue method.
void gauss_gegenbauer(int n, double lambda, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

struct CancellationResult {
  double residual_plus = 0.0;
  double residual_minus = 0.0;
  double normalizer = 0.0;
  double quadrature_error = 0.0;
  double threshold = 0.0;
  bool cancels_plus = false;
  bool cancels_minus = false;

  bool cancels() const { return cancels_plus && cancels_minus; }
};

/// Sphere integrals of Phi(K~) and Phi(-K~); each is judged against
/// max(rel_tol * normalizer, quadrature error).
CancellationResult check_cancellation(const PhiSpec& phi, const KernelSpec& spec, const SphereQuadrature& quad,
                                      double rel_tol = 1e-8);

/// Throws unless phi.ell == spec.ell and phi.p matches d/(d-alpha).
void check_consistency(const PhiSpec& phi, const KernelSpec& spec);

}  // namespace mazya
