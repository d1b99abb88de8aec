#include "mazya/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mazya {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRoundoffFloor = 1e-12;

struct PhiSums {
  double value = 0.0;
  double magnitude = 0.0;
};

PhiSums integrate_phi(const PhiSpec& phi, const GridFunction& u) {
  const double vol = u.grid.cell_volume();
  PhiSums s;
  const auto m = u.values.matrix();
  for (Index c = 0; c < u.cells(); ++c) {
    const double v = eval_phi(phi, m.col(c));
    s.value += v;
    s.magnitude += std::abs(v);
  }
  s.value *= vol;
  s.magnitude *= vol;
  if (std::abs(s.value) <= kRoundoffFloor * s.magnitude) s.value = 0.0;
  return s;
}

double pnorm_cell(const GridFunction& u, Index c) { return u.values.col(c).matrix().norm(); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

double safe_ratio(double lhs, double rhs) {
  if (rhs > 0.0) return lhs / rhs;
  return lhs == 0.0 ? 0.0 : kInf;
}

InequalityReport make_report(std::string statement_id, double lhs, double rhs, double tail) {
  InequalityReport r;
  r.statement = std::move(statement_id);
  r.lhs = lhs;
  r.rhs = rhs;
  r.ratio = safe_ratio(lhs, rhs);
  r.tail_bound = tail;
  if (lhs == 0.0 && rhs == 0.0)
    r.verdict = "vacuous";
  else
    r.verdict = std::isfinite(r.ratio) ? "pass" : "fail";
  return r;
}

int effective_hi(const GridFunction& f, const VerifyOptions& opts) {
  return opts.hi ? *opts.hi : finest_resolved_band(f.grid.cell_size());
}

namespace {

// Far-field bound with the support ball centered at c; below_lo adds the
// full-kernel decay of the bands beyond lo.
double tail_about(const KernelSpec& spec, const PhiSpec& phi, const MassPoints& m, double h, double mean, const Vector& c,
                  double r_out, int lo, bool below_lo) {
  const int d = spec.d;
  const double half_diag = 0.5 * h * std::sqrt(static_cast<double>(d));
  const double mass = m.total();
  const double moment = first_moment(m, c) + mass * half_diag;
  double rho = 0.0;
  for (Index i = 0; i < m.size(); ++i) rho = std::max(rho, (m.positions.col(i) - c).norm());
  rho += half_diag;

  double x_min = kInf;
  for (int a = 0; a < d; ++a) x_min = std::min(x_min, r_out - std::abs(c[a]));
  if (!(x_min >= 2.0 * rho)) return kInf;

  const double p = spec.p();
  const double a_exp = d - spec.alpha;
  const double sigma = sphere_measure(d);
  const double phi_sup = phi.sphere_sup();
  const double grad = a_exp * spec.profile_sup + spec.lipschitz_bound;
  const double A = grad * std::pow(2.0, a_exp + 1.0) * moment;
  const double B = std::abs(mean) * spec.profile_sup;
  const double r_band = std::ldexp(1.0, -lo);

  double core = std::pow(A, p) * std::pow(x_min, -p) / p;
  double mean_part = 0.0;
  if (B > 0.0) {
    mean_part = std::pow(B, p) * std::log(std::max(r_band + rho, x_min) / x_min);
    core *= std::pow(2.0, p - 1.0);
    mean_part *= std::pow(2.0, p - 1.0);
  }
  double tail = phi_sup * sigma * (core + mean_part);

  // shell where the outermost band only partly overlaps the support
  if (r_band + rho > x_min) {
    const double inner = std::max(r_band - rho, x_min);
    if (!(inner > 0.0)) return kInf;
    const double bound = spec.profile_sup * std::pow(inner, -a_exp) * mass;
    const double vol = sigma / d * (std::pow(r_band + rho, d) - std::pow(inner, d));
    tail += phi_sup * std::pow(bound, p) * vol;
  }
  if (below_lo) {
    const double start = r_band - rho;
    if (!(start > 0.0)) return kInf;
    tail += phi_sup * sigma * std::pow(A, p) * std::pow(start, -p) / p;
  }
  return tail;
}

double best_tail(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f, double r_out, int lo, bool below_lo) {
  const MassPoints m = mass_points(f);
  if (m.size() == 0) return 0.0;
  const double h = f.grid.cell_size();
  const double mean = integral(f);
  // any center gives a valid bound: try the moment minimizer and the support box center
  const SupportBox box = support_box(f);
  const Vector centers[2] = {min_first_moment(m, h).center, 0.5 * (box.lo + box.hi)};
  double best = kInf;
  for (const Vector& c : centers) best = std::min(best, tail_about(spec, phi, m, h, mean, c, r_out, lo, below_lo));
  return best;
}

}  // namespace

double far_field_tail(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f, double r_out, int lo) {
  return best_tail(spec, phi, f, r_out, lo, false);
}

PhiIntegral band_phi_integral(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f, const BandRange& range,
                              const VerifyOptions& opts) {
  check_consistency(phi, spec);
  const Convolution conv = convolve_detailed(spec, range, f, opts.method, opts.convolve);
  const PhiSums sums = integrate_phi(phi, conv.out);
  PhiIntegral r;
  r.value = sums.value;
  r.magnitude = sums.magnitude;
  r.lo = conv.lo;
  r.hi = conv.hi;
  r.truncated = conv.truncated;
  r.output_grid = conv.out.grid;
  if (conv.truncated) {
    if (!is_zero_mean(f))
      r.tail_bound = kInf;
    else
      r.tail_bound = best_tail(spec, phi, f, conv.out.grid.half_width, conv.lo, !range.lo);
  }
  return r;
}

PhiIntegral phi_integral(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f, const BandRange& range,
                         const VerifyOptions& opts) {
  check_consistency(phi, spec);
  if (f.components != 1) throw std::invalid_argument("phi_integral: scalar f expected");
  if (!is_zero_mean(f)) throw std::invalid_argument("phi_integral: f must have zero integral");
  return band_phi_integral(spec, phi, f, range, opts);
}

InequalityReport main_ratio(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f, const VerifyOptions& opts) {
  const int hi = effective_hi(f, opts);
  const PhiIntegral pi = phi_integral(spec, phi, f, BandRange::up_to(hi), opts);
  InequalityReport r = make_report(statement::main_ratio, std::abs(pi.value), std::pow(l1_norm(f), spec.p()), pi.tail_bound);
  r.notes = "bands (-inf," + std::to_string(hi) + "] lo_eff=" + std::to_string(pi.lo) +
            " R_out=" + fmt(pi.output_grid.half_width);
  return r;
}

InequalityReport first_lemma_check(const KernelSpec& spec, const GridFunction& f, const VerifyOptions& opts) {
  const double h = f.grid.cell_size();
  const double half_diag = 0.5 * h * std::sqrt(static_cast<double>(f.grid.d));
  for (Index c = 0; c < f.cells(); ++c)
    if (f[c] != 0.0 && f.grid.center(c).norm() + half_diag > 0.5 + 1e-12)
      throw std::invalid_argument("first_lemma_check: support of f leaves B_1/2(0)");
  const PhiSpec phi = PhiSpec::abs_power(spec.ell, spec.p());
  const PhiIntegral pi = phi_integral(spec, phi, f, BandRange::up_to(0), opts);
  InequalityReport r = make_report(statement::first_lemma, pi.value, std::pow(l1_norm(f), spec.p()), pi.tail_bound);
  r.notes = "bands (-inf,0] lo_eff=" + std::to_string(pi.lo);
  return r;
}

InequalityReport second_lemma_check(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f, int n,
                                    const VerifyOptions& opts) {
  check_consistency(phi, spec);
  const double p = spec.p();
  if (p > 2.0) throw std::invalid_argument("second_lemma_check: p > 2; use remainder_partial with the high-p variant");
  if (n < 0) throw std::invalid_argument("second_lemma_check: n must be nonnegative");
  const Convolution a = convolve_detailed(spec, BandRange::up_to(n), f, opts.method, opts.convolve);
  ConvolveOptions common = opts.convolve;
  common.output_half_width = a.out.grid.half_width;
  const Convolution b = convolve_detailed(spec, BandRange::single(n + 1), f, opts.method, common);

  const double vol = a.out.grid.cell_volume();
  const auto am = a.out.values.matrix();
  const auto bm = b.out.values.matrix();
  double diff = 0.0, phib = 0.0, mp = 0.0;
  for (Index c = 0; c < a.out.cells(); ++c) {
    const Vector av = am.col(c);
    const Vector bv = bm.col(c);
    diff += eval_phi(phi, (av + bv).eval()) - eval_phi(phi, av);
    phib += eval_phi(phi, bv);
    mp += m_p(p, av.norm(), bv.norm());
  }
  InequalityReport r = make_report(statement::second_lemma, std::abs(diff * vol), std::abs(phib * vol) + mp * vol,
                                   b.truncated ? kInf : 0.0);
  r.n = n;
  return r;
}

double local_main2_rhs(const GridFunction& f, int n, double p) {
  const int d = f.grid.d;
  const double s = std::ldexp(1.0, -n);
  const double h = f.grid.cell_size();
  if (s < h * (1.0 - 1e-12)) throw std::invalid_argument("misaligned grid: dyadic cubes finer than the grid cells");
  const MassPoints m = mass_points(f);
  if (m.size() == 0) return 0.0;
  const Index factor = static_cast<Index>(std::llround(std::pow(3.0, d)));
  const Index half = (factor - 1) / 2;

  using Key = std::vector<long long>;
  std::map<Key, std::vector<Index>> buckets;
  Key key(static_cast<std::size_t>(d));
  for (Index i = 0; i < m.size(); ++i) {
    for (int a = 0; a < d; ++a) key[static_cast<std::size_t>(a)] = static_cast<long long>(std::floor(m.positions(a, i) / s));
    buckets[key].push_back(i);
  }
  std::set<Key> cubes;
  for (const auto& [k, pts] : buckets) {
    (void)pts;
    const Index span = 2 * half + 1;
    Index count = 1;
    for (int a = 0; a < d; ++a) count *= span;
    for (Index t = 0; t < count; ++t) {
      Key j = k;
      Index u = t;
      for (int a = d - 1; a >= 0; --a) {
        j[static_cast<std::size_t>(a)] += static_cast<long long>(u % span) - half;
        u /= span;
      }
      cubes.insert(j);
    }
  }

  double sum = 0.0;
  std::vector<Index> members;
  for (const Key& j : cubes) {
    members.clear();
    const Index span = 2 * half + 1;
    Index count = 1;
    for (int a = 0; a < d; ++a) count *= span;
    for (Index t = 0; t < count; ++t) {
      Key k = j;
      Index u = t;
      for (int a = d - 1; a >= 0; --a) {
        k[static_cast<std::size_t>(a)] += static_cast<long long>(u % span) - half;
        u /= span;
      }
      const auto it = buckets.find(k);
      if (it != buckets.end()) members.insert(members.end(), it->second.begin(), it->second.end());
    }
    if (members.empty()) continue;
    std::sort(members.begin(), members.end());
    MassPoints local;
    local.positions.resize(d, static_cast<Index>(members.size()));
    local.masses.resize(static_cast<Index>(members.size()));
    for (std::size_t q = 0; q < members.size(); ++q) {
      local.positions.col(static_cast<Index>(q)) = m.positions.col(members[q]);
      local.masses[static_cast<Index>(q)] = m.masses[members[q]];
    }
    const double moment = min_first_moment(local, h).value;
    sum += std::pow(local.total(), p - 1.0) * moment;
  }
  return std::ldexp(sum, n);
}

InequalityReport main2_partial(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f, std::optional<int> N,
                               const VerifyOptions& opts) {
  check_consistency(phi, spec);
  const double p = spec.p();
  const int top = N ? *N : effective_hi(f, opts);
  if (top < 0) throw std::invalid_argument("main2_partial: N must be nonnegative");
  double lhs = 0.0, box_tail = 0.0, constant = 0.0;
  for (int n = 1; n <= top; ++n) {
    const PhiIntegral pi = band_phi_integral(spec, phi, f, BandRange::single(n), opts);
    lhs += std::abs(pi.value);
    box_tail += pi.tail_bound;
    const double rn = local_main2_rhs(f, n - 1, p);
    if (rn > 0.0) constant = std::max(constant, std::abs(pi.value) / rn);
  }
  // levels beyond N: empirical constant times the local RHS, geometric past
  // the grid resolution
  const double h = f.grid.cell_size();
  const int resolved = static_cast<int>(std::floor(-std::log2(h) + 1e-9));
  double rest = 0.0, last = 0.0;
  for (int n = top + 1; n <= resolved + 1; ++n) {
    last = local_main2_rhs(f, n - 1, p);
    rest += last;
  }
  if (top + 1 > resolved + 1 && top >= 1) last = local_main2_rhs(f, std::min(top, resolved + 1) - 1, p);
  const double q = std::pow(2.0, -f.grid.d * (p - 1.0));
  rest += last * q / (1.0 - q);
  InequalityReport r = make_report(statement::main2_partial, lhs, std::pow(l1_norm(f), p), box_tail + constant * rest);
  r.n = top;
  r.notes = "tail: empirical constant " + fmt(constant) + " times local bound";
  return r;
}

InequalityReport remainder_partial(const KernelSpec& spec, const GridFunction& f, std::optional<int> N, double p,
                                   const VerifyOptions& opts) {
  if (std::abs(p - spec.p()) > 1e-12 * std::max(1.0, p)) throw std::invalid_argument("remainder_partial: p differs from d/(d-alpha)");
  const int top = N ? *N : effective_hi(f, opts) - 1;
  if (top < 0) throw std::invalid_argument("remainder_partial: N must be nonnegative");
  Convolution a = convolve_detailed(spec, BandRange::up_to(0), f, opts.method, opts.convolve);
  ConvolveOptions common = opts.convolve;
  common.output_half_width = a.out.grid.half_width;
  const double vol = a.out.grid.cell_volume();
  std::vector<double> terms;
  bool cut = false;
  for (int n = 0; n <= top; ++n) {
    const Convolution b = convolve_detailed(spec, BandRange::single(n + 1), f, opts.method, common);
    cut = cut || b.truncated;
    double s = 0.0;
    for (Index c = 0; c < a.out.cells(); ++c) s += m_p_any(p, pnorm_cell(a.out, c), pnorm_cell(b.out, c));
    terms.push_back(s * vol);
    a.out.values += b.out.values;
  }
  double lhs = 0.0;
  for (double t : terms) lhs += t;
  double tail = 0.0;
  if (cut) {
    tail = kInf;
  } else if (terms.size() >= 2) {
    const double t1 = terms[terms.size() - 2], t2 = terms.back();
    if (t2 == 0.0)
      tail = 0.0;
    else if (t1 > 0.0 && t2 < t1)
      tail = t2 * (t2 / t1) / (1.0 - t2 / t1);
    else
      tail = kInf;
  } else if (!terms.empty() && terms.back() > 0.0) {
    tail = kInf;
  }
  InequalityReport r = make_report(statement::remainder_partial, lhs, std::pow(l1_norm(f), p), tail);
  r.n = top;
  r.notes = p > 2.0 ? "high-p variant; tail: geometric extrapolation" : "tail: geometric extrapolation";
  return r;
}

InequalityReport median_bound_check(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f, int n,
                                    const VerifyOptions& opts) {
  const double p = spec.p();
  const PhiIntegral pi = band_phi_integral(spec, phi, f, BandRange::single(n), opts);
  double rhs = 0.0;
  if (l1_norm(f) > 0.0) rhs = std::ldexp(std::pow(l1_norm(f), p - 1.0) * min_first_moment(f).value, n);
  InequalityReport r = make_report(statement::median_bound, std::abs(pi.value), rhs, pi.tail_bound);
  r.n = n;
  return r;
}

InequalityReport local_main2_check(const KernelSpec& spec, const PhiSpec& phi, const GridFunction& f, int n,
                                   const VerifyOptions& opts) {
  if (n < 0) throw std::invalid_argument("local_main2_check: n must be nonnegative");
  const PhiIntegral pi = band_phi_integral(spec, phi, f, BandRange::single(n + 1), opts);
  InequalityReport r = make_report(statement::local_main2, std::abs(pi.value), local_main2_rhs(f, n, spec.p()), pi.tail_bound);
  r.n = n;
  return r;
}

namespace {

std::vector<Vector> directions(int d, int count, std::uint64_t seed) {
  std::vector<Vector> out;
  if (d == 1) {
    out.push_back(Vector::Constant(1, 1.0));
    out.push_back(Vector::Constant(1, -1.0));
    return out;
  }
  for (int a = 0; a < d; ++a) {
    out.push_back(Vector::Unit(d, a));
    out.push_back(-Vector::Unit(d, a));
  }
  Rng rng(seed);
  for (int i = 0; i < count; ++i) out.push_back(rng.unit_vector(d));
  return out;
}

struct MaxTracker {
  double ratio = 0.0, lhs = 0.0, rhs = 0.0;
  void add(double l, double r) {
    const double q = safe_ratio(l, r);
    if (q > ratio || (std::isnan(q))) {
      ratio = std::isnan(q) ? kInf : q;
      lhs = l;
      rhs = r;
    }
  }
  InequalityReport report(const char* id) const {
    InequalityReport r = make_report(id, lhs, rhs);
    r.ratio = ratio;
    r.verdict = std::isfinite(ratio) ? "pass" : "fail";
    return r;
  }
};

}  // namespace

InequalityReport aux_k1(const KernelSpec& spec, const AuxOptions& opts) {
  const int d = spec.d;
  const BandRange range = BandRange::up_to(0);
  const double e = d - spec.alpha + 1.0;
  MaxTracker mt;
  auto sample = [&](const Vector& x, const Vector& y) {
    const double ny = y.norm();
    if (ny == 0.0) return;
    const double lhs = (eval_band_sum(spec, range, x - y) - eval_band_sum(spec, range, x)).norm();
    mt.add(lhs, ny / std::pow(x.norm(), e));
  };
  const std::vector<Vector> dirs = directions(d, 6, opts.seed);
  for (int i = 0; i <= 28; ++i) {
    const double rx = 2.0 + 0.5 * i;
    for (const Vector& u : dirs)
      for (int k = 0; k <= 8; ++k)
        for (const Vector& v : dirs) sample(rx * u, std::ldexp(1.0, -k) * v);
  }
  Rng rng(opts.seed ^ 0x1111);
  for (int s = 0; s < opts.random_samples; ++s) {
    const Vector x = rng.uniform(2.0, 16.0) * rng.unit_vector(d);
    const Vector y = std::pow(rng.uniform(), 1.0 / d) * rng.unit_vector(d);
    sample(x, y);
  }
  InequalityReport r = mt.report(statement::aux_k1);
  r.notes = "|x| in [2,16], |y| <= 1";
  return r;
}

double k2_convolution(const KernelSpec& spec, int n, const Vector& x, Index cells) {
  const int d = spec.d;
  const double r = std::ldexp(1.0, -n - 1);
  const double h = 2.0 * r / static_cast<double>(cells);
  const BandRange low = BandRange::up_to(n);
  Index total = 1;
  for (int a = 0; a < d; ++a) total *= cells;
  Vector z(d);
  double sum = 0.0;
  for (Index t = 0; t < total; ++t) {
    Index u = t;
    for (int a = d - 1; a >= 0; --a) {
      z[a] = -r + (static_cast<double>(u % cells) + 0.5) * h;
      u /= cells;
    }
    const double kb = eval_band(spec, n + 1, z).norm();
    if (kb == 0.0) continue;
    sum += eval_band_sum(spec, low, x - z).norm() * kb;
  }
  return sum * std::pow(h, d);
}

InequalityReport aux_k2(const KernelSpec& spec, const AuxOptions& opts) {
  if (std::abs(spec.p() - 2.0) > 1e-12) throw std::invalid_argument("aux_k2: requires p = 2");
  const int d = spec.d;
  const Index cells = d == 1 ? opts.k2_cells_1d : opts.k2_cells_2d;
  if (d > 2) throw std::invalid_argument("aux_k2: quadrature implemented for d <= 2");
  MaxTracker mt;
  double anchor = 0.0;
  const std::vector<Vector> dirs = directions(d, 2, opts.seed);
  for (int n = 0; n <= 1; ++n) {
    const double scale = std::ldexp(1.0, n);
    const double a0 = k2_convolution(spec, n, Vector::Zero(d), cells);
    anchor = std::max(anchor, a0);
    mt.add(a0, 0.0);
    for (int k = -12; k <= 8; ++k) {
      const double rx = std::pow(2.0, 0.5 * k) / scale;
      for (const Vector& u : dirs) {
        const double lhs = k2_convolution(spec, n, rx * u, cells);
        mt.add(lhs, scale * rx * std::pow(1.0 + scale * rx, -0.5 * d - 1.0));
      }
    }
  }
  InequalityReport r = mt.report(statement::aux_k2);
  r.notes = "n in {0,1}; value at x=0: " + fmt(anchor);
  return r;
}

double k3_integral(const KernelSpec& spec, const Vector& z, const Vector& y, Index cells) {
  const int d = spec.d;
  const double h = 4.0 / static_cast<double>(cells);
  Index total = 1;
  for (int a = 0; a < d; ++a) total *= cells;
  Vector x(d);
  double sum = 0.0;
  for (Index t = 0; t < total; ++t) {
    Index u = t;
    for (int a = d - 1; a >= 0; --a) {
      x[a] = z[a] - 2.0 + (static_cast<double>(u % cells) + 0.5) * h;
      u /= cells;
    }
    sum += (eval_band(spec, 0, x - z) - eval_band(spec, 0, x - y)).norm();
  }
  return sum * std::pow(h, d);
}

InequalityReport aux_k3(const KernelSpec& spec, const AuxOptions& opts) {
  const int d = spec.d;
  if (d > 2) throw std::invalid_argument("aux_k3: quadrature implemented for d <= 2");
  const Index cells = d == 1 ? opts.k3_cells_1d : opts.k3_cells_2d;
  MaxTracker mt;
  const Vector z = Vector::Zero(d);
  const double same = k3_integral(spec, z, z, cells);
  mt.add(same, 0.0);
  const std::vector<Vector> dirs = directions(d, d == 1 ? 0 : 2, opts.seed);
  for (int k = 1; k <= (d == 1 ? 10 : 7); ++k)
    for (const Vector& u : dirs) {
      const Vector y = std::ldexp(1.0, -k) * u;
      mt.add(k3_integral(spec, z, y, cells), y.norm());
    }
  InequalityReport r = mt.report(statement::aux_k3);
  r.notes = "z=0, |y| = 2^-k; value at z=y: " + fmt(same);
  return r;
}

InequalityReport aux_phi1(const PhiSpec& phi, const AuxOptions& opts) {
  const double p = phi.p;
  MaxTracker mt;
  auto sample = [&](const Vector& a, const Vector& b) {
    const double nb = b.norm();
    if (nb == 0.0) return;
    mt.add(std::abs(eval_phi(phi, (a + b).eval()) - eval_phi(phi, a)), std::pow(a.norm(), p - 1.0) * nb);
  };
  if (phi.ell == 1) {
    for (int i = -400; i <= 400; ++i) sample(Vector::Constant(1, 1.0), Vector::Constant(1, i / 200.0));
  }
  Rng rng(opts.seed ^ 0x2222);
  for (int s = 0; s < std::max(opts.random_samples, 10000); ++s) {
    const double ra = std::exp(rng.uniform(-7.0, 7.0));
    const Vector a = ra * rng.unit_vector(phi.ell);
    const Vector b = ra * rng.uniform(0.0, 2.0) * rng.unit_vector(phi.ell);
    sample(a, b);
  }
  InequalityReport r = mt.report(statement::aux_phi1);
  r.notes = "|b| <= 2|a|";
  return r;
}

std::vector<InequalityReport> aux_lemma_suite(const KernelSpec& spec, const PhiSpec& phi, const AuxOptions& opts) {
  check_consistency(phi, spec);
  std::vector<InequalityReport> out;
  out.push_back(aux_k1(spec, opts));
  if (std::abs(spec.p() - 2.0) <= 1e-12) out.push_back(aux_k2(spec, opts));
  out.push_back(aux_k3(spec, opts));
  out.push_back(aux_phi1(phi, opts));
  return out;
}

const char* to_string(ProbeStatus s) {
  switch (s) {
    case ProbeStatus::diverging:
      return "diverging";
    case ProbeStatus::bounded:
      return "bounded";
    case ProbeStatus::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

ProbeResult cancellation_necessity_probe(const KernelSpec& spec, const PhiSpec& phi, const ProbeOptions& probe,
                                         const VerifyOptions& opts) {
  check_consistency(phi, spec);
  if (probe.widths.empty()) throw std::invalid_argument("probe: no widths");
  if (!(probe.separation > 0.0)) throw std::invalid_argument("probe: separation must be positive");
  ProbeResult res;
  res.cancellation = check_cancellation(phi, spec, SphereQuadrature::default_for(spec.d));
  const int d = spec.d;
  Vector z = Vector::Zero(d);
  z[0] = probe.separation;
  for (double w : probe.widths) {
    GridSpec grid{d, probe.half_width, 0};
    const double cells = 2.0 * probe.half_width * static_cast<double>(probe.cells_per_width) / w;
    grid.cells_per_axis = static_cast<Index>(std::llround(cells));
    grid.validate();
    const GridFunction f = make_dipole({-0.5 * z, z, w}, grid);
    if (!(l1_norm(f) > 0.0)) throw std::invalid_argument("probe: zero test function");
    InequalityReport r = main_ratio(spec, phi, f, opts);
    r.statement = statement::necessity_probe;
    r.f_id = "dipole_w" + std::to_string(static_cast<int>(std::llround(-std::log2(w))));
    res.widths.push_back(w);
    res.ratios.push_back(r.ratio);
    res.reports.push_back(std::move(r));
  }
  const std::size_t k = res.ratios.size();
  res.increasing = k >= 3 && res.ratios[k - 3] < res.ratios[k - 2] && res.ratios[k - 2] < res.ratios[k - 1];
  for (std::size_t i = 1; i < k; ++i) {
    const double a = res.ratios[i - 1], b = res.ratios[i];
    res.max_step_factor = std::max(res.max_step_factor, std::max(safe_ratio(b, a), safe_ratio(a, b)));
  }
  if (res.cancellation.cancels())
    res.status = ProbeStatus::inconclusive;
  else
    res.status = res.increasing ? ProbeStatus::diverging : ProbeStatus::bounded;
  const std::string tag = to_string(res.status);
  for (InequalityReport& r : res.reports) {
    if (res.status == ProbeStatus::inconclusive)
      r.verdict = res.max_step_factor < probe.growth_factor ? "pass" : "fail";
    else
      r.verdict = res.status == ProbeStatus::diverging ? "pass" : "fail";
    r.notes += "; probe " + tag;
  }
  return res;
}

}  // namespace mazya
