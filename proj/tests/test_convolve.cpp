#include <doctest.h>

#include "mazya/kernel.hpp"

#include <cmath>

using namespace mazya;

namespace {

double rel_diff(const GridFunction& a, const GridFunction& b) {
  const double scale = std::max(a.values.abs().maxCoeff(), b.values.abs().maxCoeff());
  return scale == 0.0 ? 0.0 : (a.values - b.values).abs().maxCoeff() / scale;
}

GridFunction point_mass(const GridSpec& g, Index cell) {
  GridFunction f(g, 1);
  f[cell] = 1.0 / g.cell_volume();
  return f;
}

}  // namespace

TEST_CASE("direct and fast agree on small grids") {
  Rng rng(2024);
  for (int d = 1; d <= 2; ++d) {
    const KernelSpec k = d == 1 ? KernelSpec::sign(0.5) : KernelSpec::identity(2, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
      const Index n = Index{16} << (trial % 3);
      const GridSpec g{d, 1.0, n};
      GridFunction f(g, 1);
      for (Index c = 0; c < f.cells(); ++c)
        if (rng.uniform() < 0.3) f[c] = rng.normal();
      const int hi = finest_resolved_band(g.cell_size());
      const BandRange range = trial % 2 ? BandRange::up_to(hi) : BandRange::between(hi - 2, hi);
      const GridFunction a = convolve(k, range, f, ConvolveMethod::direct);
      const GridFunction b = convolve(k, range, f, ConvolveMethod::fast);
      REQUIRE(a.grid == b.grid);
      CHECK(rel_diff(a, b) <= 1e-10);
    }
  }
}

TEST_CASE("point mass reproduces the band") {
  const KernelSpec k = KernelSpec::sign(0.5);
  const GridSpec g{1, 1.0, 64};
  const Index src = 40;
  const GridFunction f = point_mass(g, src);
  const Convolution c = convolve_detailed(k, BandRange::single(0), f, ConvolveMethod::direct);
  const double h = g.cell_size();
  const Index pad = (c.out.grid.cells_per_axis - g.cells_per_axis) / 2;
  int checked = 0;
  for (Index i = 0; i < c.out.cells(); ++i) {
    const double dx = c.out.grid.center(i)[0] - g.center(src)[0];
    // cells away from the band edges see the exact kernel value
    const double r = std::abs(dx);
    if (std::abs(r - 0.5) < h || std::abs(r - 1.0) < h) continue;
    CHECK(c.out[i] == doctest::Approx(eval_band(k, 0, Vector::Constant(1, dx))[0]).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked > 50);
  CHECK(pad >= 0);
}

TEST_CASE("zero input gives zero output") {
  const GridSpec g{2, 1.0, 32};
  const GridFunction out = convolve(KernelSpec::identity(2, 1.0), BandRange::single(0), GridFunction(g, 1));
  CHECK(out.components == 2);
  CHECK(out.values.abs().maxCoeff() == 0.0);
}

TEST_CASE("integral of the output matches a brute-force double sum") {
  const KernelSpec k = KernelSpec::sign(0.5);
  const GridSpec g{1, 1.0, 256};
  Vector z = Vector::Constant(1, 0.5);
  const GridFunction f = make_dipole({Vector::Constant(1, -0.25), z, 0.0625}, g);
  const Convolution c = convolve_detailed(k, BandRange::single(0), f, ConvolveMethod::fast);
  const double total = c.out.values.sum() * g.cell_size();
  const KernelStencil st = build_stencil(k, 0, 0, g.cell_size(), c.out.grid.cells_per_axis);
  // sum_i h sum_j w(i - j) f_j = (sum_s w_s) * h sum_j f_j, every shift lands inside the output box
  const double brute = st.weights.row(0).sum() * f.values.sum() * g.cell_size();
  CHECK(std::abs(total - brute) <= 1e-10 * std::max(1.0, std::abs(brute)));
}

TEST_CASE("linearity and translation equivariance") {
  const KernelSpec k = KernelSpec::identity(2, 1.0);
  const GridSpec g{2, 1.0, 32};
  const GridFunction a = make_random_bumps(3, 7, g);
  const GridFunction b = make_random_bumps(3, 8, g);
  const BandRange range = BandRange::between(0, 1);
  const GridFunction lhs = convolve(k, range, a * 2.0 + b);
  const GridFunction rhs = convolve(k, range, a) * 2.0 + convolve(k, range, b);
  CHECK(rel_diff(lhs, rhs) <= 1e-12);

  GridFunction f(g, 1);
  f[g.ravel((IndexVector(2) << 10, 12).finished())] = 1.0;
  f[g.ravel((IndexVector(2) << 14, 12).finished())] = -1.0;
  const IndexVector shift = (IndexVector(2) << 3, -2).finished();
  const GridFunction moved = translate(f, shift);
  ConvolveOptions opts;
  opts.output_half_width = 4.0;
  const GridFunction u = convolve(k, range, f, ConvolveMethod::fast, opts);
  const GridFunction v = convolve(k, range, moved, ConvolveMethod::fast, opts);
  double worst = 0.0;
  for (Index i = 0; i < u.cells(); ++i) {
    IndexVector m = u.grid.unravel(i) + shift;
    if ((m.array() < 0).any() || (m.array() >= u.grid.cells_per_axis).any()) {
      CHECK(u.values.col(i).abs().maxCoeff() <= 1e-12 * u.values.abs().maxCoeff());
      continue;
    }
    worst = std::max(worst, (u.values.col(i) - v.values.col(u.grid.ravel(m))).abs().maxCoeff());
  }
  CHECK(worst <= 1e-12 * u.values.abs().maxCoeff());
}

TEST_CASE("resolution and memory guards") {
  const KernelSpec k = KernelSpec::sign(0.5);
  const GridSpec g{1, 1.0, 16};
  GridFunction f(g, 1);
  f[3] = 1.0;
  CHECK_THROWS_WITH(convolve(k, BandRange::single(4), f), "band unresolved");
  ConvolveOptions tight;
  tight.max_cells = 8;
  CHECK_THROWS_AS(convolve(k, BandRange::single(0), f, ConvolveMethod::fast, tight), std::runtime_error);
  GridFunction two(g, 2);
  CHECK_THROWS(convolve(k, BandRange::single(0), two));
}

TEST_CASE("far-field decay of zero-mean sources") {
  // |K_{<=0} * f(x)| |x|^{d - alpha + 1} / |f|_1 stays bounded for |x| >= 2
  const KernelSpec k = KernelSpec::sign(0.5);
  const GridSpec g{1, 0.5, 128};
  double worst = 0.0;
  for (int s = 1; s <= 4; ++s) {
    const GridFunction f = make_random_bumps(3, static_cast<std::uint64_t>(s), g);
    ConvolveOptions opts;
    opts.output_half_width = 16.0;
    const GridFunction u = convolve(k, BandRange::up_to(0), f, ConvolveMethod::fast, opts);
    for (Index i = 0; i < u.cells(); ++i) {
      const double r = std::abs(u.grid.center(i)[0]);
      if (r < 2.0 || r > 12.0) continue;
      worst = std::max(worst, std::abs(u[i]) * std::pow(r, 1.0 - k.alpha + 1.0) / l1_norm(f));
    }
  }
  CHECK(std::isfinite(worst));
  CHECK(worst < 10.0);
}
