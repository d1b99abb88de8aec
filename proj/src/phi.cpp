#include "mazya/phi.hpp"

#include <Eigen/Eigenvalues>

#include <numbers>
#include <stdexcept>

namespace mazya {

PhiSpec PhiSpec::signed_power(double p) {
  PhiSpec phi;
  phi.ell = 1;
  phi.p = p;
  phi.family = PhiFamily::signed_power;
  phi.lipschitz_bound = p;
  phi.name = "signed_power";
  return phi;
}

PhiSpec PhiSpec::abs_power(int ell, double p) {
  PhiSpec phi;
  phi.ell = ell;
  phi.p = p;
  phi.family = PhiFamily::abs_power;
  phi.lipschitz_bound = p;
  phi.name = "abs_power";
  return phi;
}

PhiSpec PhiSpec::quadratic_form(double a11, double a12, double a22) {
  PhiSpec phi;
  phi.ell = 2;
  phi.p = 2.0;
  phi.family = PhiFamily::quadratic_form;
  phi.a11 = a11;
  phi.a12 = a12;
  phi.a22 = a22;
  phi.lipschitz_bound = 2.0 * phi.sphere_sup();
  phi.name = "quadratic_form";
  return phi;
}

PhiSpec PhiSpec::norm_power_signed(const Vector& u, double p) {
  if (std::abs(u.norm() - 1.0) > 1e-12) throw std::invalid_argument("norm_power_signed: direction must be a unit vector");
  PhiSpec phi;
  phi.ell = static_cast<int>(u.size());
  phi.p = p;
  phi.family = PhiFamily::norm_power_signed;
  phi.direction = u;
  phi.lipschitz_bound = p + 1.0;
  phi.name = "norm_power_signed";
  return phi;
}

PhiSpec PhiSpec::custom(int ell, double p, std::function<double(const Vector&)> fn, double lipschitz, std::string name) {
  PhiSpec phi;
  phi.ell = ell;
  phi.p = p;
  phi.family = PhiFamily::custom;
  phi.evaluator = std::move(fn);
  phi.lipschitz_bound = lipschitz;
  phi.name = std::move(name);
  if (!(p > 1.0)) throw std::invalid_argument("custom phi: p must exceed 1");
  const double dev = check_homogeneity(phi, 256, 0xc0ffee);
  if (!(dev <= 1e-10))
    throw std::invalid_argument("custom phi '" + phi.name + "' is not positively " + std::to_string(p) + "-homogeneous");
  return phi;
}

double PhiSpec::sphere_sup() const {
  switch (family) {
    case PhiFamily::signed_power:
    case PhiFamily::abs_power:
      return 1.0;
    case PhiFamily::norm_power_signed:
      return direction.norm();
    case PhiFamily::quadratic_form: {
      Eigen::Matrix2d a;
      a << a11, 0.5 * a12, 0.5 * a12, a22;
      return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(a).eigenvalues().cwiseAbs().maxCoeff();
    }
    case PhiFamily::custom: {
      double m = 0.0;
      if (ell == 1) return std::max(std::abs(evaluator(Vector::Constant(1, 1.0))), std::abs(evaluator(Vector::Constant(1, -1.0))));
      Rng rng(0x5a5a);
      for (int i = 0; i < 4096; ++i) m = std::max(m, std::abs(evaluator(rng.unit_vector(ell))));
      return m;
    }
  }
  return 0.0;
}

double check_homogeneity(const PhiSpec& phi, int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("check_homogeneity: samples must be positive");
  const double sup = phi.sphere_sup();
  const double scale = sup > 0.0 ? sup : 1.0;
  Rng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double radius = std::exp(rng.uniform(std::log(0.125), std::log(8.0)));
    const double t = std::exp(rng.uniform(std::log(0.125), std::log(8.0)));
    const Vector v = radius * rng.unit_vector(phi.ell);
    const double tp = std::pow(t, phi.p);
    const double defect = std::abs(eval_phi(phi, (t * v).eval()) - tp * eval_phi(phi, v));
    if (defect == 0.0) continue;
    worst = std::max(worst, defect / (tp * std::pow(radius, phi.p) * scale));
  }
  return worst;
}

SphereQuadrature SphereQuadrature::two_point() {
  SphereQuadrature q;
  q.d = 1;
  q.scheme = QuadratureScheme::two_point;
  q.nodes.resize(1, 2);
  q.nodes << 1.0, -1.0;
  q.weights = Eigen::VectorXd::Ones(2);
  q.counts = {2};
  return q;
}

SphereQuadrature SphereQuadrature::uniform_circle(int n) {
  if (n < 1) throw std::invalid_argument("uniform_circle: node count must be positive");
  SphereQuadrature q;
  q.d = 2;
  q.scheme = QuadratureScheme::uniform_circle;
  q.nodes.resize(2, n);
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * std::numbers::pi * k / n;
    q.nodes(0, k) = std::cos(th);
    q.nodes(1, k) = std::sin(th);
  }
  q.weights = Eigen::VectorXd::Constant(n, 2.0 * std::numbers::pi / n);
  q.counts = {n};
  return q;
}

void gauss_gegenbauer(int n, double lambda, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (n < 1) throw std::invalid_argument("gauss_gegenbauer: need at least one node");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k * (k + 2.0 * lambda - 1.0) / (4.0 * (k + lambda) * (k + lambda - 1.0));
    jac(k, k - 1) = jac(k - 1, k) = std::sqrt(beta);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  const double mu0 = std::sqrt(std::numbers::pi) * std::tgamma(lambda + 0.5) / std::tgamma(lambda + 1.0);
  nodes = es.eigenvalues();
  weights = mu0 * es.eigenvectors().row(0).transpose().array().square();
}

SphereQuadrature SphereQuadrature::product_angles(int d, const std::vector<int>& counts) {
  if (d < 3) throw std::invalid_argument("product_angles: d >= 3 required");
  if (static_cast<int>(counts.size()) != d - 1) throw std::invalid_argument("product_angles: need d - 1 node counts");
  SphereQuadrature q = uniform_circle(counts[0]);
  for (int m = 3; m <= d; ++m) {
    Eigen::VectorXd t, w;
    gauss_gegenbauer(counts[static_cast<std::size_t>(m - 2)], 0.5 * (m - 2), t, w);
    const Index prev = q.size();
    Eigen::MatrixXd nodes(m, prev * t.size());
    Eigen::VectorXd weights(prev * t.size());
    for (Index i = 0; i < t.size(); ++i) {
      const double s = std::sqrt(std::max(0.0, 1.0 - t[i] * t[i]));
      for (Index j = 0; j < prev; ++j) {
        const Index c = i * prev + j;
        nodes.col(c).head(m - 1) = s * q.nodes.col(j);
        nodes(m - 1, c) = t[i];
        weights[c] = w[i] * q.weights[j];
      }
    }
    q.nodes = std::move(nodes);
    q.weights = std::move(weights);
  }
  q.d = d;
  q.scheme = QuadratureScheme::product_angles;
  q.counts = counts;
  return q;
}

SphereQuadrature SphereQuadrature::monte_carlo(int d, int samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("monte_carlo: need at least two samples");
  SphereQuadrature q;
  q.d = d;
  q.scheme = QuadratureScheme::monte_carlo;
  q.seed = seed;
  q.counts = {samples};
  Rng rng(seed);
  q.nodes.resize(d, samples);
  for (int i = 0; i < samples; ++i) q.nodes.col(i) = rng.unit_vector(d);
  q.weights = Eigen::VectorXd::Constant(samples, sphere_measure(d) / samples);
  return q;
}

SphereQuadrature SphereQuadrature::default_for(int d) {
  if (d == 1) return two_point();
  if (d == 2) return uniform_circle(256);
  if (d == 3) return product_angles(3, {32, 16});
  return monte_carlo(d, 1 << 16, 1);
}

SphereQuadrature SphereQuadrature::coarsened() const {
  switch (scheme) {
    case QuadratureScheme::two_point:
      return *this;
    case QuadratureScheme::monte_carlo:
      return monte_carlo(d, std::max(2, counts[0] / 2), seed);
    case QuadratureScheme::uniform_circle:
      return uniform_circle(std::max(1, counts[0] / 2));
    case QuadratureScheme::product_angles: {
      std::vector<int> c = counts;
      for (int& v : c) v = std::max(2, v / 2);
      return product_angles(d, c);
    }
  }
  return *this;
}

QuadratureEstimate sphere_integrate_with_error(const SphereQuadrature& quad, const std::function<double(const Vector&)>& g) {
  QuadratureEstimate est;
  if (quad.scheme == QuadratureScheme::monte_carlo) {
    Eigen::VectorXd v(quad.size());
    for (Index i = 0; i < quad.size(); ++i) v[i] = g(Vector(quad.nodes.col(i)));
    const double measure = quad.weights.sum();
    const double mean = v.mean();
    const double var = (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
    est.value = measure * mean;
    est.error = 3.0 * measure * std::sqrt(var / static_cast<double>(v.size()));
    return est;
  }
  est.value = sphere_integrate(quad, g);
  if (quad.scheme != QuadratureScheme::two_point) est.error = std::abs(est.value - sphere_integrate(quad.coarsened(), g));
  return est;
}

void check_consistency(const PhiSpec& phi, const KernelSpec& spec) {
  if (phi.ell != spec.ell)
    throw std::invalid_argument("phi argument dimension " + std::to_string(phi.ell) + " differs from kernel codomain " +
                                std::to_string(spec.ell));
  if (std::abs(phi.p - spec.p()) > 1e-12 * std::max(1.0, spec.p()))
    throw std::invalid_argument("phi homogeneity " + std::to_string(phi.p) + " differs from d/(d-alpha) = " +
                                std::to_string(spec.p()));
}

CancellationResult check_cancellation(const PhiSpec& phi, const KernelSpec& spec, const SphereQuadrature& quad,
                                      double rel_tol) {
  check_consistency(phi, spec);
  if (quad.d != spec.d) throw std::invalid_argument("check_cancellation: quadrature dimension differs from kernel");
  auto plus = [&](const Vector& z) { return eval_phi(phi, spec.profile(z)); };
  auto minus = [&](const Vector& z) { return eval_phi(phi, (-spec.profile(z)).eval()); };
  const QuadratureEstimate ip = sphere_integrate_with_error(quad, plus);
  const QuadratureEstimate im = sphere_integrate_with_error(quad, minus);

  CancellationResult r;
  r.residual_plus = ip.value;
  r.residual_minus = im.value;
  r.normalizer = sphere_integrate(quad, [&](const Vector& z) { return std::abs(plus(z)) + std::abs(minus(z)); });
  r.quadrature_error = std::max(ip.error, im.error);
  r.threshold = std::max(rel_tol * r.normalizer, r.quadrature_error);
  r.cancels_plus = std::abs(r.residual_plus) <= r.threshold;
  r.cancels_minus = std::abs(r.residual_minus) <= r.threshold;
  return r;
}

}  // namespace mazya
