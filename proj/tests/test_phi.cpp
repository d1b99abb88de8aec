#include <doctest.h>

#include "mazya/phi.hpp"

#include <cmath>
#include <numbers>

using namespace mazya;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

constexpr double pi = std::numbers::pi;

}  // namespace

TEST_CASE("built-in evaluations") {
  const PhiSpec sp = PhiSpec::signed_power(2.0);
  CHECK(eval_phi(sp, vec({-3.0})) == -9.0);
  CHECK(eval_phi(sp, vec({0.0})) == 0.0);
  const PhiSpec q = PhiSpec::quadratic_form(1.0, 0.0, -1.0);
  CHECK(eval_phi(q, vec({2.0, 1.0})) == doctest::Approx(3.0));
  CHECK(eval_phi(q, vec({0.0, 0.0})) == 0.0);
  const PhiSpec ap = PhiSpec::abs_power(1, 2.0);
  CHECK(eval_phi(ap, vec({-3.0})) == 9.0);
  const PhiSpec np = PhiSpec::norm_power_signed(vec({0.0, 1.0}), 1.5);
  CHECK(eval_phi(np, vec({3.0, 4.0})) == doctest::Approx(std::sqrt(5.0) * 4.0));
  const PhiSpec np1 = PhiSpec::norm_power_signed(vec({-1.0}), 1.5);
  for (double t : {-2.0, -0.3, 0.7, 5.0}) CHECK(eval_phi(np1, vec({t})) == doctest::Approx(-eval_phi(PhiSpec::signed_power(1.5), vec({t}))));
  CHECK_THROWS(PhiSpec::norm_power_signed(vec({1.0, 1.0}), 1.5));
}

TEST_CASE("homogeneity defects") {
  for (double p : {1.25, 1.5, 2.0, 3.0}) {
    CHECK(check_homogeneity(PhiSpec::signed_power(p), 500, 1) <= 1e-12);
    CHECK(check_homogeneity(PhiSpec::abs_power(2, p), 500, 2) <= 1e-12);
    CHECK(check_homogeneity(PhiSpec::norm_power_signed(vec({0.6, 0.8}), p), 500, 3) <= 1e-12);
  }
  CHECK(check_homogeneity(PhiSpec::quadratic_form(1.0, 0.5, -2.0), 500, 4) <= 1e-12);
  const PhiSpec good = PhiSpec::custom(2, 1.5, [](const Vector& v) { return std::pow(v.norm(), 1.5); }, 1.5);
  CHECK(check_homogeneity(good, 500, 5) <= 1e-12);

  PhiSpec broken = good;
  broken.evaluator = [](const Vector& v) { return std::pow(v.norm(), 1.5) + 1.0; };
  CHECK(check_homogeneity(broken, 500, 6) > 0.1);
  CHECK_THROWS(PhiSpec::custom(2, 1.5, [](const Vector& v) { return std::pow(v.norm(), 1.5) + 1.0; }, 1.5));
}

TEST_CASE("quadrature weights sum to the sphere measure") {
  CHECK(SphereQuadrature::two_point().weights.sum() == doctest::Approx(2.0).epsilon(1e-15));
  for (int n : {3, 8, 64, 256}) CHECK(std::abs(SphereQuadrature::uniform_circle(n).weights.sum() - 2 * pi) <= 1e-12);
  const SphereQuadrature s2 = SphereQuadrature::default_for(3);
  CHECK(std::abs(s2.weights.sum() - 4 * pi) <= 1e-12);
  CHECK((s2.weights.array() > 0).all());
  const SphereQuadrature s3 = SphereQuadrature::product_angles(4, {16, 8, 8});
  CHECK(std::abs(s3.weights.sum() - sphere_measure(4)) <= 1e-12);
  const SphereQuadrature mc = SphereQuadrature::monte_carlo(5, 1000, 1);
  CHECK(std::abs(mc.weights.sum() - sphere_measure(5)) <= 1e-12);
  const SphereQuadrature half = mc.coarsened();
  CHECK(half.size() == 500);
  CHECK((half.nodes - mc.nodes.leftCols(500)).norm() == 0.0);
  const QuadratureEstimate e = sphere_integrate_with_error(mc, [](const Vector& z) { return z[0] * z[0]; });
  CHECK(e.error > 0.0);
  CHECK(std::abs(e.value - sphere_measure(5) / 5.0) <= 10.0 * e.error);
  for (Index i = 0; i < s3.size(); ++i) CHECK(std::abs(s3.nodes.col(i).norm() - 1.0) < 1e-14);
}

TEST_CASE("circle integrals") {
  const SphereQuadrature q = SphereQuadrature::uniform_circle(64);
  CHECK(std::abs(sphere_integrate(q, [](const Vector&) { return 1.0; }) - 2 * pi) <= 1e-12);
  CHECK(std::abs(sphere_integrate(q, [](const Vector& z) { return z[0]; })) <= 1e-14);
  CHECK(std::abs(sphere_integrate(q, [](const Vector& z) { return z[0] * z[0]; }) - pi) <= 1e-12);
  // trigonometric polynomials of degree below the node count are exact
  for (int k = 1; k < 64; ++k) {
    const double v = sphere_integrate(q, [k](const Vector& z) { return std::cos(k * std::atan2(z[1], z[0])); });
    CHECK(std::abs(v) <= 1e-12);
  }
}

TEST_CASE("sphere integrals in three dimensions") {
  const SphereQuadrature q = SphereQuadrature::default_for(3);
  CHECK(std::abs(sphere_integrate(q, [](const Vector& z) { return z[2] * z[2]; }) - 4 * pi / 3) <= 1e-12);
  CHECK(std::abs(sphere_integrate(q, [](const Vector& z) { return z[0] * z[0] * z[1] * z[1]; }) - 4 * pi / 15) <= 1e-12);
  const QuadratureEstimate e = sphere_integrate_with_error(q, [](const Vector& z) { return std::exp(z[0]); });
  CHECK(std::abs(e.value - 4 * pi * std::sinh(1.0)) <= 1e-10);
}

TEST_CASE("cancellation for the two examples") {
  const CancellationResult ex1 =
      check_cancellation(PhiSpec::signed_power(2.0), KernelSpec::sign(0.5), SphereQuadrature::two_point());
  CHECK(ex1.residual_plus == 0.0);
  CHECK(ex1.residual_minus == 0.0);
  CHECK(ex1.normalizer == 4.0);
  CHECK(ex1.cancels());

  const CancellationResult sq =
      check_cancellation(PhiSpec::abs_power(1, 2.0), KernelSpec::sign(0.5), SphereQuadrature::two_point());
  CHECK(sq.residual_plus == 2.0);
  CHECK_FALSE(sq.cancels());

  const KernelSpec k2 = KernelSpec::identity(2, 1.0);
  const SphereQuadrature circle = SphereQuadrature::uniform_circle(256);
  for (double a12 : {0.0, 0.7, -3.0}) {
    const CancellationResult c = check_cancellation(PhiSpec::quadratic_form(1.0, a12, -1.0), k2, circle);
    CHECK(std::abs(c.residual_plus) <= 1e-10);
    CHECK(std::abs(c.residual_minus) <= 1e-10);
    CHECK(c.cancels());
  }
  for (double a11 : {1.0, 0.25, 2.0}) {
    const double a22 = 1.0 - a11;
    const CancellationResult c = check_cancellation(PhiSpec::quadratic_form(a11, 0.3, a22), k2, circle);
    CHECK(std::abs(c.residual_plus - pi) <= 1e-10);
    CHECK_FALSE(c.cancels());
  }
  const CancellationResult full = check_cancellation(PhiSpec::quadratic_form(1.0, 0.0, 1.0), k2, circle);
  CHECK(std::abs(full.residual_plus - 2 * pi) <= 1e-10);
}

TEST_CASE("residuals scale by lambda^p under profile rescaling") {
  KernelSpec k = KernelSpec::identity(2, 1.0);
  const PhiSpec phi = PhiSpec::quadratic_form(1.0, 0.2, 0.5);
  const SphereQuadrature q = SphereQuadrature::uniform_circle(128);
  const CancellationResult base = check_cancellation(phi, k, q);
  const double lambda = 3.0;
  k.profile = [lambda](const Vector& z) { return Vector(lambda * z); };
  const CancellationResult scaled = check_cancellation(phi, k, q);
  CHECK(scaled.residual_plus / base.residual_plus == doctest::Approx(lambda * lambda).epsilon(1e-13));
  CHECK(scaled.residual_minus / base.residual_minus == doctest::Approx(lambda * lambda).epsilon(1e-13));
}

TEST_CASE("consistency errors") {
  CHECK_THROWS(check_cancellation(PhiSpec::signed_power(1.5), KernelSpec::sign(0.5), SphereQuadrature::two_point()));
  CHECK_THROWS(check_cancellation(PhiSpec::signed_power(2.0), KernelSpec::identity(2, 1.0), SphereQuadrature::uniform_circle(8)));
}

TEST_CASE("sphere sup") {
  CHECK(PhiSpec::quadratic_form(1.0, 0.0, -1.0).sphere_sup() == doctest::Approx(1.0));
  CHECK(PhiSpec::quadratic_form(2.0, 0.0, 0.5).sphere_sup() == doctest::Approx(2.0));
  CHECK(PhiSpec::signed_power(3.0).sphere_sup() == 1.0);
}
