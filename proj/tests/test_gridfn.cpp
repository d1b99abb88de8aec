#include <doctest.h>

#include "mazya/gridfn.hpp"

#include <cmath>
#include <filesystem>

using namespace mazya;

namespace {

GridFunction constant(const GridSpec& g, double v) {
  GridFunction f(g, 1);
  f.values.setConstant(v);
  return f;
}

}  // namespace

TEST_CASE("grid geometry") {
  const GridSpec g{2, 1.0, 8};
  CHECK(g.cell_size() == 0.25);
  CHECK(g.cell_count() == 64);
  for (Index c = 0; c < g.cell_count(); ++c) CHECK(g.ravel(g.unravel(c)) == c);
  CHECK(g.center(0)[0] == -0.875);
  CHECK_THROWS(GridSpec({1, 1.0, 12}).validate());
  CHECK_THROWS(GridSpec({1, 3.0, 16}).validate());
}

TEST_CASE("norms and integrals") {
  for (Index n : {4, 64, 1024}) CHECK(l1_norm(constant({1, 1.0, n}, 1.0)) == doctest::Approx(2.0).epsilon(1e-15));
  const GridSpec g{2, 1.0, 64};
  GridFunction one(g, 1);
  one[37] = -3.0;
  CHECK(l1_norm(one) == doctest::Approx(3.0 * g.cell_volume()));
  CHECK(integral(one) == doctest::Approx(-3.0 * g.cell_volume()));

  const GridFunction dip = make_dipole({Vector::Constant(2, -0.25), Vector::Constant(2, 0.5), 0.125}, g);
  CHECK(std::abs(integral(dip)) <= 1e-12 * l1_norm(dip));
  CHECK(l1_norm(dip) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(is_zero_mean(dip));
}

TEST_CASE("scaling is linear") {
  const GridSpec g{1, 1.0, 256};
  const GridFunction f = make_random_bumps(4, 3, g);
  const Vector c = Vector::Constant(1, 0.1);
  for (double s : {0.5, 3.0, 17.0}) {
    const GridFunction h = f * s;
    CHECK(l1_norm(h) == doctest::Approx(s * l1_norm(f)).epsilon(1e-14));
    CHECK(first_moment(h, c) == doctest::Approx(s * first_moment(f, c)).epsilon(1e-14));
  }
}

TEST_CASE("zero-mean projection") {
  const GridSpec g{1, 1.0, 64};
  const GridFunction dip = make_dipole({Vector::Constant(1, -0.25), Vector::Constant(1, 0.5), 0.0625}, g);
  CHECK((project_zero_mean(dip).values - dip.values).abs().maxCoeff() <= 1e-15);

  GridFunction single(g, 1);
  single[10] = 1.0;
  CHECK_THROWS_WITH(project_zero_mean(single), "project_zero_mean: support too small");
  CHECK_THROWS_WITH(project_zero_mean(GridFunction(g, 1)), "project_zero_mean: zero function");
  GridFunction flat(g, 1);
  for (Index i = 32; i < 48; ++i) flat[i] = 1.0;
  CHECK_THROWS_WITH(project_zero_mean(flat), "project_zero_mean: projection annihilates f");

  GridFunction ramp(g, 1);
  for (Index i = 20; i < 40; ++i) ramp[i] = static_cast<double>(i);
  const GridFunction z = project_zero_mean(ramp);
  CHECK(std::abs(integral(z)) <= 1e-12 * l1_norm(z));
  for (Index i = 0; i < g.cell_count(); ++i) CHECK((z[i] != 0.0) <= (ramp[i] != 0.0));
}

TEST_CASE("first moments") {
  const GridSpec g{1, 1.0, 512};
  CHECK(first_moment(constant(g, 1.0), Vector::Zero(1)) == doctest::Approx(1.0).epsilon(1e-5));

  GridFunction m(g, 1);
  m[100] = 1.0 / g.cell_size();
  CHECK(first_moment(m, g.center(100)) == 0.0);
  m[300] = 1.0 / g.cell_size();
  const double gap = g.center(300)[0] - g.center(100)[0];
  CHECK(first_moment(m, g.center(100)) == doctest::Approx(gap));
  const MomentMinimum mm = min_first_moment(m);
  CHECK(mm.value == doctest::Approx(gap));
  CHECK(mm.value <= mm.initial_value);
}

TEST_CASE("moment minimizer for symmetric and point data") {
  const GridSpec g{2, 1.0, 64};
  Vector z(2);
  z << 0.5, 0.0;
  const GridFunction dip = make_dipole({-0.5 * z, z, 0.0625}, g);
  const MomentMinimum mm = min_first_moment(dip);
  CHECK(mm.value <= first_moment(dip, Vector::Zero(2)) + 1e-12);
  CHECK(mm.value <= mm.initial_value);

  GridFunction pt(g, 1);
  pt[g.ravel((IndexVector(2) << 9, 41).finished())] = 2.0;
  const MomentMinimum pm = min_first_moment(pt);
  CHECK(pm.value == 0.0);
  CHECK((pm.center - g.center(g.ravel((IndexVector(2) << 9, 41).finished()))).norm() == 0.0);
  CHECK_THROWS(min_first_moment(GridFunction(g, 1)));
}

TEST_CASE("first moment is convex along lines") {
  const GridSpec g{2, 1.0, 32};
  const GridFunction f = make_random_bumps(3, 12, g);
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const Vector a = rng.normal_vector(2), dir = rng.unit_vector(2);
    const double s = 0.05;
    const double second = first_moment(f, a + s * dir) - 2.0 * first_moment(f, a) + first_moment(f, a - s * dir);
    CHECK(second >= -1e-12);
  }
}

TEST_CASE("dipole and bump guards") {
  const GridSpec g{1, 1.0, 64};
  CHECK_THROWS_WITH(make_dipole({Vector::Constant(1, -0.25), Vector::Constant(1, 0.5), 0.02}, g),
                    "make_dipole: width unresolved");
  CHECK_THROWS(make_bump(g, Vector::Constant(1, 0.95), 0.125));
  const GridFunction b = make_bump(g, Vector::Zero(1), 0.125);
  CHECK(integral(b) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("random bumps are deterministic and zero-mean") {
  const GridSpec g{2, 1.0, 64};
  const GridFunction a = make_random_bumps(5, 99, g), b = make_random_bumps(5, 99, g);
  CHECK((a.values == b.values).all());
  CHECK(is_zero_mean(a));
  CHECK_FALSE((make_random_bumps(5, 98, g).values == a.values).all());
}

TEST_CASE("dilation keeps the L1 norm") {
  const GridSpec g{2, 1.0, 32};
  const GridFunction f = make_random_bumps(3, 5, g);
  for (int n : {-2, 1, 3}) {
    const GridFunction fn = dilate(f, n);
    CHECK(fn.grid.half_width == std::ldexp(1.0, -n));
    CHECK(std::abs(l1_norm(fn) - l1_norm(f)) <= 1e-12 * l1_norm(f));
  }
}

TEST_CASE("translation and support") {
  const GridSpec g{1, 1.0, 32};
  GridFunction f(g, 1);
  f[10] = 1.0;
  f[12] = -1.0;
  const GridFunction t = translate(f, (IndexVector(1) << 5).finished());
  CHECK(t[15] == 1.0);
  CHECK(t[17] == -1.0);
  CHECK_THROWS(translate(f, (IndexVector(1) << 25).finished()));
  const SupportBox box = support_box(t);
  CHECK_FALSE(box.empty);
  CHECK(box.lo[0] == g.center(15)[0]);
  CHECK(box.hi[0] == g.center(17)[0]);
  CHECK(support_box(GridFunction(g, 1)).empty);
}

TEST_CASE("binary round trip") {
  const GridSpec g{2, 0.5, 64};
  const GridFunction f = make_random_bumps(2, 1, g);
  const std::filesystem::path path = std::filesystem::temp_directory_path() / "mazya_gridfn_roundtrip.bin";
  write_grid_function(path, f);
  CHECK(std::filesystem::exists(path.string() + ".json"));
  const GridFunction back = read_grid_function(path);
  CHECK(back.grid == f.grid);
  CHECK(back.components == 1);
  CHECK((back.values == f.values).all());
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
  CHECK_THROWS(read_grid_function(path));
}
