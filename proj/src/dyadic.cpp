#include "mazya/dyadic.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <string>

namespace mazya {

namespace {

Index ipow(Index base, int e) {
  Index r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

Index ravel_side(const IndexVector& j, Index side) {
  Index lin = 0;
  for (Index a = 0; a < j.size(); ++a) lin = lin * side + j[a];
  return lin;
}

IndexVector unravel_side(Index lin, int d, Index side) {
  IndexVector j(d);
  for (int a = d - 1; a >= 0; --a) {
    j[a] = lin % side;
    lin /= side;
  }
  return j;
}

Index exact_integer(double v, const char* what) {
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9 * std::max(1.0, std::abs(v))) throw std::invalid_argument(std::string("misaligned grid: ") + what);
  return static_cast<Index>(r);
}

}  // namespace

Cube Cube::dilated(double lambda) const {
  const double s = lambda * side;
  return {(center().array() - 0.5 * s).matrix(), s};
}

bool Cube::contains(const Vector& x) const {
  return ((x - corner).array() >= 0.0).all() && ((x - corner).array() <= side).all();
}

Cube DyadicCube::cube() const {
  const double s = side();
  return {(root.corner + s * index.cast<double>()).eval(), s};
}

std::vector<DyadicCube> children(const DyadicCube& q) { return cubes_at(q, 1); }

std::vector<DyadicCube> cubes_at(const DyadicCube& q, int n) {
  if (n < 0) throw std::invalid_argument("cubes_at: generation offset must be nonnegative");
  const int d = q.root.dim();
  const Index per = Index{1} << n;
  const Index count = ipow(per, d);
  std::vector<DyadicCube> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index lin = 0; lin < count; ++lin) {
    DyadicCube c{q.root, q.generation + n, q.index * per + unravel_side(lin, d, per)};
    out.push_back(std::move(c));
  }
  return out;
}

MassTree::MassTree(const GridFunction& f, const Cube& q, int depth) : d_(f.grid.d), root_(q) {
  if (q.dim() != d_) throw std::invalid_argument("MassTree: cube dimension differs from grid");
  if (f.components != 1) throw std::invalid_argument("MassTree: scalar function required");
  if (depth < 0) throw std::invalid_argument("MassTree: depth must be nonnegative");
  if (static_cast<long long>(depth) * d_ > 26) throw std::runtime_error("MassTree: memory bound exceeded");
  const double h = f.grid.cell_size();
  const Index per_sub = exact_integer(std::ldexp(q.side, -depth) / h, "subcube side is not a whole number of cells");
  if (per_sub < 1) throw std::invalid_argument("misaligned grid: depth exceeds the grid resolution");
  IndexVector offset(d_);
  for (int a = 0; a < d_; ++a) offset[a] = exact_integer((q.corner[a] + f.grid.half_width) / h, "cube corner off the cell lattice");

  const Index fine = Index{1} << depth;
  const Index span = per_sub * fine;
  const double vol = f.grid.cell_volume();
  levels_.resize(static_cast<std::size_t>(depth + 1));
  Eigen::ArrayXd& leaf = levels_.back();
  leaf = Eigen::ArrayXd::Zero(ipow(fine, d_));
  IndexVector sub(d_);
  for (Index c = 0; c < f.cells(); ++c) {
    const double v = f.values(0, c);
    if (v == 0.0) continue;
    const IndexVector local = f.grid.unravel(c) - offset;
    bool inside = true;
    for (int a = 0; a < d_ && inside; ++a) {
      inside = local[a] >= 0 && local[a] < span;
      sub[a] = local[a] / per_sub;
    }
    if (!inside) continue;
    const double m = std::abs(v) * vol;
    leaf[ravel_side(sub, fine)] += m;
    total_ += m;
  }
  for (int n = depth - 1; n >= 0; --n) {
    const Index side = Index{1} << n;
    const Eigen::ArrayXd& child = levels_[static_cast<std::size_t>(n + 1)];
    Eigen::ArrayXd& parent = levels_[static_cast<std::size_t>(n)];
    parent = Eigen::ArrayXd::Zero(ipow(side, d_));
    for (Index lin = 0; lin < child.size(); ++lin) {
      IndexVector j = unravel_side(lin, d_, 2 * side);
      for (int a = 0; a < d_; ++a) j[a] >>= 1;
      parent[ravel_side(j, side)] += child[lin];
    }
  }
}

double MassTree::mass(int n, const IndexVector& j) const {
  return masses(n)[ravel_side(j, Index{1} << n)];
}

double energy(const MassTree& tree, int n, double p) { return tree.masses(n).pow(p).sum(); }

double energy(const GridFunction& f, const Cube& q, int n, double p) { return energy(MassTree(f, q, n), n, p); }

TelescopeResult telescope_check(const GridFunction& f, const Cube& q, double p, int depth) {
  const MassTree tree(f, q, depth);
  TelescopeResult r;
  for (int n = 0; n <= depth; ++n) r.energies.push_back(energy(tree, n, p));
  r.norm_power = std::pow(tree.total(), p);
  double sum = 0.0;
  double worst = std::numeric_limits<double>::infinity();
  for (int n = 0; n < depth; ++n) {
    const double inc = r.energies[static_cast<std::size_t>(n)] - r.energies[static_cast<std::size_t>(n + 1)];
    r.increments.push_back(inc);
    sum += inc;
    r.partial_sums.push_back(sum);
    worst = std::min(worst, inc);
  }
  if (r.norm_power > 0.0) {
    r.defect = std::abs((r.norm_power - r.energies.back()) - sum) / r.norm_power;
    r.min_increment = depth > 0 ? worst / r.norm_power : 0.0;
  }
  return r;
}

double greedy_delta(double p) { return 1.0 - std::pow(0.51, 1.0 / (p - 1.0)); }

GreedyChain greedy_chain(const GridFunction& f, const Cube& q, int depth, double delta) {
  const MassTree tree(f, q, depth);
  if (!(tree.total() > 0.0)) throw std::invalid_argument("greedy_chain: zero function");
  GreedyChain chain;
  DyadicCube cur = DyadicCube::of(q);
  chain.cubes.push_back(cur);
  chain.masses.push_back(tree.masses(0)[0]);
  for (int n = 1; n <= depth; ++n) {
    const std::vector<DyadicCube> kids = children(cur);
    std::size_t best = 0;
    double best_mass = -1.0;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const double m = tree.mass(n, kids[i].index);
      if (m > best_mass) {
        best_mass = m;
        best = i;
      }
    }
    if (delta >= 0.0 && best_mass >= (1.0 - delta) * chain.masses.back()) ++chain.concentrated_levels;
    cur = kids[best];
    chain.cubes.push_back(cur);
    chain.masses.push_back(best_mass);
  }
  chain.c0 = cur.cube().center();
  chain.moment_error_bound = cur.cube().diameter() * tree.total();
  return chain;
}

IncrementCheck energy_increment_lemma_check(const GridFunction& f, const Cube& q, double p, int depth, double eps) {
  const MassTree tree(f, q, depth);
  if (!(tree.total() > 0.0)) throw std::invalid_argument("energy_increment_lemma_check: zero function");
  IncrementCheck r;
  for (int n = 0; n <= depth; ++n) r.energies.push_back(energy(tree, n, p));
  double weight = 1.0;
  for (int n = 0; n < depth; ++n) {
    r.rhs += weight * (r.energies[static_cast<std::size_t>(n)] - r.energies[static_cast<std::size_t>(n + 1)]);
    weight *= 1.0 - eps;
  }
  const MassPoints pts = mass_points_in_box(f, q.corner, (q.corner.array() + q.side).matrix());
  r.moment = min_first_moment(pts, f.grid.cell_size()).value;
  r.lhs = std::pow(tree.total(), p - 1.0) * r.moment / q.side;
  if (r.rhs > 0.0)
    r.ratio = r.lhs / r.rhs;
  else
    r.ratio = r.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return r;
}

LatticeCover three_lattice_cover(const Cube& q, bool iterated, int verify_depth) {
  const int d = q.dim();
  LatticeCover cover;
  cover.factor = iterated ? static_cast<int>(ipow(3, d)) : 3;
  const int F = cover.factor;
  const Index half = (F - 1) / 2;
  // per axis: F consecutive offsets a0..a0+F-1 with a0 + F - 1 <= -half and
  // a0 + F 2^s >= half + 1
  const Index a0 = -half - (F - 1);
  int s = 0;
  while (a0 + F * (Index{1} << s) < half + 1) ++s;
  cover.size_ratio = static_cast<double>(F) * std::ldexp(1.0, s);
  const Index count = ipow(F, d);
  for (Index lin = 0; lin < count; ++lin) {
    const IndexVector k = unravel_side(lin, d, F);
    Vector corner(d);
    for (int a = 0; a < d; ++a) corner[a] = q.corner[a] + q.side * static_cast<double>(a0 + k[a]);
    cover.cubes.push_back({corner, q.side * cover.size_ratio});
  }
  cover.verified_depth = verify_depth;
  cover.failures = lattice_cover_failures(cover, q, verify_depth, &cover.checked);
  if (!cover.verified())
    throw std::runtime_error("three_lattice_cover: covering property failed for " + std::to_string(cover.failures) + " cubes");
  return cover;
}

long long lattice_cover_failures(const LatticeCover& cover, const Cube& q, int depth, long long* checked) {
  const int d = q.dim();
  const Index unit = Index{1} << depth;  // integer units of 2^{-depth} l(Q)
  const Index F = cover.factor;
  const Index half = (F - 1) / 2;
  struct IntCube {
    IndexVector corner;
    Index side;
  };
  std::vector<IntCube> lattice;
  for (const Cube& c : cover.cubes) {
    IntCube ic{IndexVector(d), exact_integer(c.side / q.side * static_cast<double>(unit), "cover side")};
    for (int a = 0; a < d; ++a)
      ic.corner[a] = exact_integer((c.corner[a] - q.corner[a]) / q.side * static_cast<double>(unit), "cover corner");
    lattice.push_back(std::move(ic));
  }
  long long fails = 0, total = 0;
  for (int k = 0; k <= depth; ++k) {
    const Index per = Index{1} << k;
    const Index cell = unit >> k;
    const Index side = F * cell;
    const Index n = ipow(per, d);
    for (Index lin = 0; lin < n; ++lin) {
      const IndexVector j = unravel_side(lin, d, per);
      ++total;
      bool found = false;
      for (const IntCube& c : lattice) {
        if (c.side % side != 0 || !is_power_of_two(c.side / side)) continue;
        bool ok = true;
        for (int a = 0; a < d && ok; ++a) {
          const Index lo = (j[a] - half) * cell - c.corner[a];
          ok = lo >= 0 && lo + side <= c.side && lo % side == 0;
        }
        if (ok) {
          found = true;
          break;
        }
      }
      if (!found) ++fails;
    }
  }
  if (checked) *checked = total;
  return fails;
}

namespace {

void for_each_composition(int n, int total, const std::function<void(const std::vector<double>&)>& fn, int resolution) {
  std::vector<int> parts(static_cast<std::size_t>(n), 0);
  std::vector<double> z(static_cast<std::size_t>(n));
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == n - 1) {
      parts[static_cast<std::size_t>(i)] = left;
      for (int a = 0; a < n; ++a) z[static_cast<std::size_t>(a)] = static_cast<double>(parts[static_cast<std::size_t>(a)]) / resolution;
      fn(z);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      parts[static_cast<std::size_t>(i)] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, total);
}

double energy_gap(double p, const std::vector<double>& z) {
  double s = 0.0, sp = 0.0;
  for (double v : z) {
    s += v;
    sp += std::pow(v, p);
  }
  return std::pow(s, p) - sp;
}

}  // namespace

EnergyBoundResult energy_bound_infimum(double p, int n, int resolution) {
  if (n < 2 || resolution < 2) throw std::invalid_argument("energy_bound_infimum: need n >= 2 and resolution >= 2");
  EnergyBoundResult r{p, n, resolution, std::numeric_limits<double>::infinity(), {}, 0};
  for_each_composition(n, resolution, [&](const std::vector<double>& z) {
    double s = 0.0, zmax = 0.0;
    for (double v : z) {
      s += v;
      zmax = std::max(zmax, v);
    }
    const double den = std::pow(s, p - 1.0) * (s - zmax);
    if (!(den > 0.0)) return;
    ++r.points;
    const double ratio = energy_gap(p, z) / den;
    if (ratio < r.infimum) {
      r.infimum = ratio;
      r.argmin = z;
    }
  }, resolution);
  return r;
}

EnergyBoundResult energy_bound2_infimum(double p, int n, int resolution) {
  if (n < 2 || n > 20 || resolution < 2) throw std::invalid_argument("energy_bound2_infimum: need 2 <= n <= 20 and resolution >= 2");
  EnergyBoundResult r{p, n, resolution, std::numeric_limits<double>::infinity(), {}, 0};
  const unsigned full = (1u << n) - 1u;
  for_each_composition(n, resolution, [&](const std::vector<double>& z) {
    const double gap = energy_gap(p, z);
    for (unsigned mask = 1; mask < full; ++mask) {
      double in = 0.0, out = 0.0;
      for (int a = 0; a < n; ++a) ((mask >> a) & 1u ? in : out) += z[static_cast<std::size_t>(a)];
      const double den = m_p_any(p, in, out);
      if (!(den > 0.0)) continue;
      ++r.points;
      const double ratio = gap / den;
      if (ratio < r.infimum) {
        r.infimum = ratio;
        r.argmin = z;
      }
    }
  }, resolution);
  return r;
}

bool MpProperties::passes(double tol) const {
  return symmetry_defect <= tol && homogeneity_defect <= tol && scaling_excess <= tol &&
         subadditivity_constant <= 1.0 + tol && theta_defect <= tol && concavity_excess <= tol &&
         std::isfinite(lipschitz_ratio) && lipschitz_ratio < lipschitz_limit;
}

MpProperties measure_mp_properties(double p, long long samples, std::uint64_t seed) {
  if (!(p > 1.0 && p <= 2.0)) throw std::invalid_argument("measure_mp_properties: requires 1 < p <= 2");
  MpProperties r;
  r.p = p;
  r.samples = samples;
  Rng rng(seed);
  auto draw = [&] { return std::exp(rng.uniform(-7.0, 7.0)); };
  auto rel = [](double a, double b) { return b == 0.0 ? std::abs(a) : std::abs(a - b) / std::abs(b); };
  for (long long s = 0; s < samples; ++s) {
    const double x = draw(), y = draw();
    const double m = m_p(p, x, y);
    r.symmetry_defect = std::max(r.symmetry_defect, rel(m_p(p, y, x), m));

    const double t = draw();
    const double tp = std::pow(t, p);
    r.homogeneity_defect = std::max(r.homogeneity_defect, rel(m_p(p, t * x, t * y), tp * m));

    const double lambda = rng.uniform(0.0, 1.0);
    if (lambda > 0.0) {
      const double bound = std::pow(lambda, p - 1.0) * m;
      r.scaling_excess = std::max(r.scaling_excess, (m_p(p, x, lambda * y) - bound) / bound);
    }

    const int k = 2 + static_cast<int>(rng.next() % 5);
    const double b = draw();
    double sum_a = 0.0, sum_m = 0.0, sum_theta = 0.0;
    for (int i = 0; i < k; ++i) {
      const double a = draw();
      sum_a += a;
      sum_m += m_p(p, a, b);
      sum_theta += theta(p, a / b);
    }
    const double whole = m_p(p, sum_a, b);
    const double whole_theta = theta(p, sum_a / b);
    r.subadditivity_constant = std::max(r.subadditivity_constant, whole / sum_m);
    r.theta_constant = std::max(r.theta_constant, whole_theta / sum_theta);
    r.theta_defect = std::max(r.theta_defect, rel(std::pow(b, p) * whole_theta, whole));

    const double delta = y * rng.uniform(0.01, 0.5);
    const double second = m_p(p, x, y - delta) - 2.0 * m + m_p(p, x, y + delta);
    r.concavity_excess = std::max(r.concavity_excess, second / m);
  }

  const double step = 1e-6;
  const double top = 10.0 - step;
  auto quotient = [&](double x, double y) {
    const double m = m_p(p, x, y);
    return std::max(std::abs(m_p(p, x + step, y) - m), std::abs(m_p(p, x, y + step) - m)) / step;
  };
  const int n = 400;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) r.lipschitz_ratio = std::max(r.lipschitz_ratio, quotient(top * i / n, top * j / n));
  for (long long s = 0; s < samples; ++s) {
    const double x = rng.uniform(0.0, top);
    // straddle the ridge x = y as well as generic points
    const double y = (s % 2 == 0) ? std::clamp(x + rng.uniform(-4.0, 4.0) * step, 0.0, top) : rng.uniform(0.0, top);
    r.lipschitz_ratio = std::max(r.lipschitz_ratio, quotient(x, y));
  }
  r.lipschitz_limit = 10.0 * std::max(1.0, p - 1.0);
  return r;
}

}  // namespace mazya
