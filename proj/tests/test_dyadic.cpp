#include <doctest.h>

#include "mazya/dyadic.hpp"

#include <cmath>

using namespace mazya;

namespace {

// d = 1 grid on [0, 1) written through a [-1, 1] box: Q = [0, 1] is the right half.
GridSpec half_grid(Index cells) { return {1, 1.0, cells}; }
Cube right_half() { return {Vector::Zero(1), 1.0}; }

GridFunction masses_1d(const std::vector<double>& per_half) {
  const GridSpec g = half_grid(8);
  GridFunction f(g, 1);
  // cells 4..7 cover [0, 1]; two cells per half of Q
  f[4] = f[5] = per_half[0] / (2 * g.cell_size());
  f[6] = f[7] = per_half[1] / (2 * g.cell_size());
  return f;
}

}  // namespace

TEST_CASE("children and generations") {
  CHECK(cubes_at(DyadicCube::of(Cube::unit(2)), 1).size() == 4);
  for (const DyadicCube& c : cubes_at(DyadicCube::of(Cube::unit(2)), 1)) CHECK(c.side() == 0.5);
  const std::vector<DyadicCube> eighths = cubes_at(DyadicCube::of(Cube::unit(1)), 3);
  REQUIRE(eighths.size() == 8);
  for (std::size_t j = 0; j < 8; ++j) CHECK(eighths[j].cube().corner[0] == doctest::Approx(j / 8.0));
  CHECK(cubes_at(DyadicCube::of(Cube::unit(3)), 0).size() == 1);
  const DyadicCube q = DyadicCube::of(Cube::unit(2));
  double vol = 0;
  for (const DyadicCube& c : children(q)) vol += std::pow(c.side(), 2);
  CHECK(vol == doctest::Approx(1.0));
}

TEST_CASE("energies of simple functions") {
  for (int d = 1; d <= 2; ++d) {
    const GridSpec g{d, 1.0, 32};
    GridFunction one(g, 1);
    one.values.setConstant(1.0);
    const Cube q{Vector::Zero(d), 1.0};
    for (double p : {1.5, 2.0, 3.0})
      for (int n = 0; n <= 4; ++n)
        CHECK(energy(one, q, n, p) == doctest::Approx(std::pow(2.0, -n * d * (p - 1.0))).epsilon(1e-13));
  }
  const GridFunction f = masses_1d({0.75, 0.25});
  CHECK(energy(f, right_half(), 1, 2.0) == doctest::Approx(0.625));
  const GridFunction left_only = masses_1d({0.6, 0.0});
  CHECK(energy(left_only, right_half(), 1, 2.0) == doctest::Approx(energy(left_only, right_half(), 0, 2.0)));
}

TEST_CASE("misaligned grids are rejected") {
  const GridSpec g{1, 1.0, 8};
  GridFunction f(g, 1);
  f[5] = 1.0;
  CHECK_THROWS_WITH_AS(energy(f, Cube{Vector::Constant(1, 0.1), 0.5}, 1, 2.0), doctest::Contains("misaligned grid"),
                       std::invalid_argument);
  CHECK_THROWS(energy(f, right_half(), 3, 2.0));
}

TEST_CASE("telescoping identity") {
  const GridSpec g{1, 1.0, 64};
  GridFunction one(g, 1);
  for (Index i = 32; i < 64; ++i) one[i] = 1.0;
  const TelescopeResult t = telescope_check(one, right_half(), 2.0, 3);
  REQUIRE(t.increments.size() == 3);
  for (int n = 0; n < 3; ++n) CHECK(t.increments[n] == doctest::Approx(std::ldexp(1.0, -n - 1)));
  CHECK(t.ok());

  GridFunction pt(g, 1);
  pt[40] = 5.0;
  const TelescopeResult tp = telescope_check(pt, right_half(), 1.5, 5);
  for (double inc : tp.increments) CHECK(inc == doctest::Approx(0.0).scale(1.0));
  CHECK(tp.ok());

  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const GridSpec g2{2, 1.0, 32};
    GridFunction f(g2, 1);
    for (Index c = 0; c < f.cells(); ++c) f[c] = rng.uniform() < 0.5 ? rng.normal() : 0.0;
    for (double p : {1.5, 2.0, 3.0}) {
      const TelescopeResult r = telescope_check(f, Cube{Vector::Constant(2, -1.0), 2.0}, p, 5);
      CHECK(r.ok());
      for (std::size_t n = 1; n < r.energies.size(); ++n) CHECK(r.energies[n] <= r.energies[n - 1] * (1 + 1e-14));
    }
  }
}

TEST_CASE("M_p values and errors") {
  CHECK(m_p(2.0, 3.0, 5.0) == 15.0);
  CHECK(m_p(1.5, 4.0, 1.0) == doctest::Approx(2.0));
  CHECK(m_p(1.5, 0.0, 7.0) == 0.0);
  CHECK(m_p_highp(3.0, 0.0, 7.0) == 0.0);
  CHECK(m_p_highp(3.0, 1.0, 2.0) == doctest::Approx(1.0 * 2.0 + 1.0 * 4.0));
  CHECK_THROWS(m_p(2.5, 1.0, 1.0));
  CHECK_THROWS(m_p(1.5, -1.0, 1.0));
  CHECK_THROWS(m_p_highp(2.0, 1.0, 1.0));
  CHECK(m_p_any(3.0, 1.0, 2.0) == m_p_highp(3.0, 1.0, 2.0));
  CHECK(m_p(1.5, 2.0, 9.0) == doctest::Approx(std::pow(2.0, 1.5) * theta(1.5, 4.5)));
}

TEST_CASE("M_p calculus over samples") {
  for (double p : {1.25, 1.5, 1.75, 2.0}) {
    const MpProperties m = measure_mp_properties(p, 20000, 7);
    CHECK(m.symmetry_defect <= 1e-12);
    CHECK(m.homogeneity_defect <= 1e-12);
    CHECK(m.scaling_excess <= 1e-12);
    CHECK(std::isfinite(m.subadditivity_constant));
    CHECK(m.theta_defect <= 1e-12);
    CHECK(m.concavity_excess <= 1e-12);
    CHECK(m.lipschitz_ratio < m.lipschitz_limit);
    CHECK(m.passes());
  }
  CHECK_THROWS(measure_mp_properties(2.5, 10, 1));
}

TEST_CASE("greedy chain") {
  const GridSpec g{1, 1.0, 64};
  GridFunction pt(g, 1);
  pt[45] = 1.0;
  const GreedyChain c = greedy_chain(pt, right_half(), 5);
  REQUIRE(c.cubes.size() == 6);
  for (const DyadicCube& q : c.cubes) CHECK(q.cube().contains(g.center(45)));
  CHECK(std::abs(c.c0[0] - g.center(45)[0]) <= c.cubes.back().side());

  GridFunction one(g, 1);
  for (Index i = 32; i < 64; ++i) one[i] = 1.0;
  for (const DyadicCube& q : greedy_chain(one, right_half(), 4).cubes) CHECK(q.index.sum() == 0);

  const GridFunction f = masses_1d({0.9, 0.1});
  CHECK(greedy_chain(f, right_half(), 1).cubes[1].cube().corner[0] == 0.0);
  CHECK_THROWS(greedy_chain(GridFunction(g, 1), right_half(), 2));
  CHECK(greedy_delta(2.0) == doctest::Approx(0.49));
}

TEST_CASE("energy increment lemma") {
  const GridSpec g{1, 1.0, 8192};
  GridFunction one(g, 1);
  for (Index i = 4096; i < 8192; ++i) one[i] = 1.0;
  const IncrementCheck c = energy_increment_lemma_check(one, right_half(), 2.0, 12, 0.49);
  CHECK(c.lhs == doctest::Approx(0.25).epsilon(1e-6));
  double rhs = 0.0;
  for (int n = 0; n < 12; ++n) rhs += std::pow(0.51, n) * std::ldexp(1.0, -n - 1);
  CHECK(c.rhs == doctest::Approx(rhs).epsilon(1e-12));
  CHECK(c.ratio < 1.0);

  GridFunction pt(g, 1);
  pt[5000] = 1.0;
  const IncrementCheck z = energy_increment_lemma_check(pt, right_half(), 2.0, 6);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == 0.0);
  CHECK(z.ratio == 0.0);

  const GridSpec g2{2, 1.0, 64};
  GridFunction two(g2, 1);
  two[g2.ravel((IndexVector(2) << 33, 33).finished())] = 1.0;
  two[g2.ravel((IndexVector(2) << 62, 62).finished())] = 1.0;
  const IncrementCheck t = energy_increment_lemma_check(two, Cube{Vector::Zero(2), 1.0}, 1.5, 5);
  CHECK(t.ratio > 0.0);
  CHECK(std::isfinite(t.ratio));
}

TEST_CASE("three-lattice covers") {
  for (int d = 1; d <= 2; ++d) {
    const LatticeCover plain = three_lattice_cover(Cube::unit(d), false, 6);
    CHECK(plain.cubes.size() == static_cast<std::size_t>(std::pow(3, d)));
    CHECK(plain.factor == 3);
    CHECK(plain.verified());
    CHECK(plain.checked > 0);
    CHECK(plain.size_ratio == doctest::Approx(6.0));

    const LatticeCover it = three_lattice_cover(Cube::unit(d), true, 6);
    CHECK(it.factor == static_cast<int>(std::pow(3, d)));
    CHECK(it.verified());
    CHECK(it.cubes.size() == static_cast<std::size_t>(std::pow(it.factor, d)));
  }
  CHECK(three_lattice_cover(Cube::unit(2), true, 3).cubes.size() == 81);

  // a cover made of a single unshifted lattice misses some cubes
  LatticeCover bad = three_lattice_cover(Cube::unit(1), false, 4);
  bad.cubes.resize(1);
  CHECK(lattice_cover_failures(bad, Cube::unit(1), 4) > 0);
}

TEST_CASE("energy bound infima") {
  for (int n : {2, 3, 4})
    for (double p : {1.5, 2.0, 3.0}) {
      const EnergyBoundResult r = energy_bound_infimum(p, n, n == 4 ? 32 : 64);
      CHECK(r.infimum > 0.0);
      CHECK(r.points > 0);
    }
  // [1 - z^2 - (1 - z)^2] / (1 - z) = 2z on [1/2, 1)
  CHECK(energy_bound_infimum(2.0, 2, 64).infimum == doctest::Approx(1.0).epsilon(2e-2));
  for (int n : {2, 3})
    for (double p : {1.5, 2.0, 3.0}) CHECK(energy_bound2_infimum(p, n, 32).infimum > 0.0);
}
