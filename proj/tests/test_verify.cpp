#include <doctest.h>

#include "mazya/verify.hpp"

#include <cmath>

using namespace mazya;

namespace {

const KernelSpec ex1 = KernelSpec::sign(0.5);
const PhiSpec tt = PhiSpec::signed_power(2.0);

GridFunction dipole_1d(Index cells, double width, double sep = 0.5, double R = 1.0) {
  const GridSpec g{1, R, cells};
  return make_dipole({Vector::Constant(1, -0.5 * sep), Vector::Constant(1, sep), width}, g);
}

}  // namespace

TEST_CASE("report helpers") {
  CHECK(safe_ratio(0.0, 0.0) == 0.0);
  CHECK(std::isinf(safe_ratio(1.0, 0.0)));
  CHECK(make_report("x", 0.0, 0.0).verdict == "vacuous");
  CHECK(make_report("x", 1.0, 2.0).verdict == "pass");
  CHECK(make_report("x", 1.0, 2.0).ratio == 0.5);
  CHECK(make_report("x", 1.0, 0.0).verdict == "fail");
}

TEST_CASE("phi integral of trivial inputs") {
  const GridFunction f = dipole_1d(256, 0.0625);
  PhiSpec zero = PhiSpec::custom(1, 2.0, [](const Vector&) { return 0.0; }, 0.0);
  const PhiIntegral a = phi_integral(ex1, zero, f, BandRange::up_to(4));
  CHECK(a.value == 0.0);
  const PhiIntegral b = phi_integral(ex1, tt, GridFunction(f.grid, 1), BandRange::up_to(4));
  CHECK(b.value == 0.0);
  CHECK(b.tail_bound == 0.0);
  GridFunction bump = make_bump(f.grid, Vector::Zero(1), 0.125);
  CHECK_THROWS(phi_integral(ex1, tt, bump, BandRange::up_to(4)));
  CHECK_THROWS(phi_integral(ex1, PhiSpec::signed_power(1.5), f, BandRange::up_to(4)));
}

TEST_CASE("main ratio is invariant under amplitude and dilation") {
  const GridFunction f = dipole_1d(512, 0.0625);
  const InequalityReport r = main_ratio(ex1, tt, f);
  const InequalityReport r3 = main_ratio(ex1, tt, f * 3.0);
  CHECK(std::isfinite(r.ratio));
  CHECK(std::abs(r3.ratio - r.ratio) <= 1e-10 * r.ratio);
  const InequalityReport rd = main_ratio(ex1, tt, dilate(f, 1));
  CHECK(std::abs(rd.ratio - r.ratio) <= 1e-10 * r.ratio);
}

TEST_CASE("band widening stays within the reported tail") {
  const GridFunction f = dipole_1d(512, 0.0625);
  VerifyOptions narrow;
  VerifyOptions wide;
  wide.convolve.far_field_factor = 15.0;
  const PhiIntegral a = phi_integral(ex1, tt, f, BandRange::up_to(5), narrow);
  const PhiIntegral b = phi_integral(ex1, tt, f, BandRange::up_to(5), wide);
  CHECK(b.output_grid.half_width > a.output_grid.half_width);
  CHECK(std::abs(a.value - b.value) <= a.tail_bound + b.tail_bound);
  CHECK(b.tail_bound < a.tail_bound);
}

TEST_CASE("value converges under grid refinement") {
  const PhiIntegral a = phi_integral(ex1, tt, dipole_1d(512, 0.0625), BandRange::up_to(5));
  const PhiIntegral b = phi_integral(ex1, tt, dipole_1d(1024, 0.0625), BandRange::up_to(5));
  CHECK(std::abs(a.value - b.value) <= 2e-3 * std::abs(b.value));
}

TEST_CASE("translation by whole cells") {
  const GridFunction f = dipole_1d(512, 0.0625, 0.5, 1.0);
  const GridFunction g = translate(f, (IndexVector(1) << 16).finished());
  const PhiIntegral a = phi_integral(ex1, tt, f, BandRange::up_to(5));
  const PhiIntegral b = phi_integral(ex1, tt, g, BandRange::up_to(5));
  CHECK(std::abs(a.value - b.value) <= a.tail_bound + b.tail_bound + 1e-12);
}

TEST_CASE("first lemma") {
  const GridSpec g{1, 1.0, 512};
  const GridFunction f = make_dipole({Vector::Constant(1, -0.125), Vector::Constant(1, 0.25), 0.03125}, g);
  const InequalityReport r = first_lemma_check(ex1, f);
  CHECK(r.verdict == "pass");
  CHECK(std::abs(first_lemma_check(ex1, f * 4.0).ratio - r.ratio) <= 1e-10 * r.ratio);
  CHECK(first_lemma_check(ex1, GridFunction(g, 1)).verdict == "vacuous");
  CHECK_THROWS(first_lemma_check(ex1, dipole_1d(512, 0.0625, 1.0)));
}

TEST_CASE("second lemma ratios stay bounded in n") {
  const GridFunction f = dipole_1d(1024, 0.03125);
  double lo = INFINITY, hi = 0.0;
  for (int n = 0; n <= 4; ++n) {
    const InequalityReport r = second_lemma_check(ex1, tt, f, n);
    CHECK(r.n == n);
    CHECK(std::isfinite(r.ratio));
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  CHECK(hi < 10.0);
  CHECK(second_lemma_check(ex1, tt, GridFunction(f.grid, 1), 1).verdict == "vacuous");
  const KernelSpec k3 = KernelSpec::identity(3, 2.0);
  CHECK_THROWS(second_lemma_check(k3, PhiSpec::abs_power(3, 3.0), GridFunction(GridSpec{3, 1.0, 16}, 1), 0));
}

TEST_CASE("main2 partial sums") {
  const GridFunction f = dipole_1d(1024, 0.0625);
  const InequalityReport a = main2_partial(ex1, tt, f, 4);
  const InequalityReport b = main2_partial(ex1, tt, f, 6);
  CHECK(b.lhs >= a.lhs);
  CHECK(b.lhs - a.lhs <= a.tail_bound);
  CHECK(main2_partial(ex1, tt, GridFunction(f.grid, 1), 4).lhs == 0.0);
  CHECK(std::abs(main2_partial(ex1, tt, f * 2.0, 4).ratio - a.ratio) <= 1e-10 * a.ratio);
}

TEST_CASE("remainder partial sums") {
  const GridFunction f = dipole_1d(1024, 0.0625);
  const InequalityReport r = remainder_partial(ex1, f, 4, 2.0);
  CHECK(std::isfinite(r.ratio));
  CHECK(std::abs(remainder_partial(ex1, f * 5.0, 4, 2.0).ratio - r.ratio) <= 1e-10 * r.ratio);
  CHECK(remainder_partial(ex1, GridFunction(f.grid, 1), 4, 2.0).lhs == 0.0);
  CHECK_THROWS(remainder_partial(ex1, f, 4, 3.0));
}

TEST_CASE("median bound and local bound") {
  const GridFunction f = dipole_1d(1024, 0.0625);
  double best = 0.0;
  for (int n = 0; n <= 4; ++n) {
    const InequalityReport m = median_bound_check(ex1, tt, f, n);
    CHECK(std::isfinite(m.ratio));
    best = std::max(best, m.ratio);
    const InequalityReport l = local_main2_check(ex1, tt, f, n);
    CHECK(std::isfinite(l.ratio));
    const InequalityReport l3 = local_main2_check(ex1, tt, f * 3.0, n);
    CHECK(l3.rhs == doctest::Approx(9.0 * l.rhs).epsilon(1e-12));
    CHECK(std::abs(l3.lhs - 9.0 * l.lhs) <= 1e-10 * l3.rhs);
  }
  CHECK(best > 0.0);
  GridFunction pt(f.grid, 1);
  pt[700] = 1.0;
  const InequalityReport p = median_bound_check(ex1, tt, pt, 2);
  CHECK(p.rhs == 0.0);
}

TEST_CASE("single point masses cancel band by band") {
  const GridSpec g{1, 1.0, 1024};
  GridFunction pt(g, 1);
  pt[300] = 1.0 / g.cell_size();
  for (int n = 0; n <= 6; ++n) {
    const PhiIntegral v = band_phi_integral(ex1, tt, pt, BandRange::single(n));
    CHECK(std::abs(v.value) <= 1e-6 * v.magnitude);
  }
}

TEST_CASE("auxiliary lemmas") {
  const AuxOptions opts{1, 2000, 1024, 64, 4096, 128};
  const std::vector<InequalityReport> rows = aux_lemma_suite(ex1, tt, opts);
  CHECK(rows.size() == 4);
  for (const InequalityReport& r : rows) {
    CHECK(r.verdict == "pass");
    CHECK(std::isfinite(r.ratio));
  }
  CHECK(k2_convolution(ex1, 0, Vector::Zero(1), 1024) == 0.0);
  CHECK(k3_integral(ex1, Vector::Zero(1), Vector::Zero(1), 1024) == 0.0);
  CHECK(aux_lemma_suite(KernelSpec::identity(2, 0.5), PhiSpec::abs_power(2, 4.0 / 3.0), opts).size() == 3);
  CHECK_THROWS(aux_k2(KernelSpec::identity(2, 0.5), opts));
}

TEST_CASE("necessity probe") {
  ProbeOptions probe;
  probe.widths = {0.125, 0.0625, 0.03125, 0.015625};
  const ProbeResult sq = cancellation_necessity_probe(ex1, PhiSpec::abs_power(1, 2.0), probe);
  CHECK(sq.status == ProbeStatus::diverging);
  CHECK(sq.increasing);
  for (std::size_t i = 1; i < sq.ratios.size(); ++i) CHECK(sq.ratios[i] > sq.ratios[i - 1]);
  const ProbeResult ok = cancellation_necessity_probe(ex1, tt, probe);
  CHECK(ok.status == ProbeStatus::inconclusive);
  CHECK(ok.max_step_factor < 1.25);
  CHECK(std::string(to_string(ok.status)) == "inconclusive");
  for (const InequalityReport& r : ok.reports) CHECK(r.statement == statement::necessity_probe);
  probe.widths.clear();
  CHECK_THROWS(cancellation_necessity_probe(ex1, tt, probe));
}
