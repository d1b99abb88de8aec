#include "mazya/gridfn.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mazya {

Index GridSpec::cell_count() const {
  Index n = 1;
  for (int i = 0; i < d; ++i) n *= cells_per_axis;
  return n;
}

IndexVector GridSpec::unravel(Index linear) const {
  IndexVector m(d);
  for (int k = d - 1; k >= 0; --k) {
    m[k] = linear % cells_per_axis;
    linear /= cells_per_axis;
  }
  return m;
}

Index GridSpec::ravel(const IndexVector& multi) const {
  Index linear = 0;
  for (int k = 0; k < d; ++k) linear = linear * cells_per_axis + multi[k];
  return linear;
}

Vector GridSpec::center(Index linear) const {
  Vector x(d);
  for (int k = d - 1; k >= 0; --k) {
    x[k] = coordinate(linear % cells_per_axis);
    linear /= cells_per_axis;
  }
  return x;
}

void GridSpec::validate() const {
  if (d < 1) throw std::invalid_argument("grid: dimension must be positive");
  if (!is_power_of_two(cells_per_axis)) throw std::invalid_argument("grid: cells_per_axis must be a power of two");
  if (!(half_width > 0.0)) throw std::invalid_argument("grid: half_width must be positive");
  int e = 0;
  if (std::frexp(half_width, &e) != 0.5) throw std::invalid_argument("grid: half_width must be a power of two");
}

GridFunction::GridFunction(const GridSpec& g, int comps)
    : grid(g), components(comps), values(Eigen::ArrayXXd::Zero(comps, g.cell_count())) {}

GridFunction GridFunction::operator*(double s) const {
  GridFunction r = *this;
  r.values *= s;
  return r;
}

GridFunction GridFunction::operator+(const GridFunction& o) const {
  if (!(grid == o.grid) || components != o.components) throw std::invalid_argument("grid function layouts differ");
  GridFunction r = *this;
  r.values += o.values;
  return r;
}

GridFunction GridFunction::operator-(const GridFunction& o) const { return *this + o * -1.0; }

MassPoints mass_points(const GridFunction& f) {
  const double vol = f.grid.cell_volume();
  std::vector<Index> nz;
  for (Index c = 0; c < f.cells(); ++c)
    if (f.values.col(c).matrix().norm() != 0.0) nz.push_back(c);
  MassPoints m;
  m.positions.resize(f.grid.d, static_cast<Index>(nz.size()));
  m.masses.resize(static_cast<Index>(nz.size()));
  for (Index k = 0; k < static_cast<Index>(nz.size()); ++k) {
    m.positions.col(k) = f.grid.center(nz[k]);
    m.masses[k] = f.values.col(nz[k]).matrix().norm() * vol;
  }
  return m;
}

MassPoints mass_points_in_box(const GridFunction& f, const Vector& lo, const Vector& hi) {
  MassPoints all = mass_points(f);
  std::vector<Index> keep;
  for (Index k = 0; k < all.size(); ++k) {
    const auto x = all.positions.col(k);
    if ((x.array() >= lo.array()).all() && (x.array() <= hi.array()).all()) keep.push_back(k);
  }
  MassPoints m;
  m.positions.resize(f.grid.d, static_cast<Index>(keep.size()));
  m.masses.resize(static_cast<Index>(keep.size()));
  for (Index k = 0; k < static_cast<Index>(keep.size()); ++k) {
    m.positions.col(k) = all.positions.col(keep[k]);
    m.masses[k] = all.masses[keep[k]];
  }
  return m;
}

double l1_norm(const GridFunction& f) { return f.values.abs().colwise().sum().sum() * f.grid.cell_volume(); }

double integral(const GridFunction& f) { return f.values.sum() * f.grid.cell_volume(); }

bool is_zero_mean(const GridFunction& f, double rel_tol) {
  return std::abs(integral(f)) <= rel_tol * l1_norm(f);
}

GridFunction project_zero_mean(const GridFunction& f) {
  if (f.components != 1) throw std::invalid_argument("project_zero_mean: scalar function expected");
  Index support = 0;
  double sum = 0.0;
  for (Index c = 0; c < f.cells(); ++c) {
    if (f[c] != 0.0) {
      ++support;
      sum += f[c];
    }
  }
  if (support == 0) throw std::invalid_argument("project_zero_mean: zero function");
  if (support == 1) throw std::invalid_argument("project_zero_mean: support too small");
  const double mean = sum / static_cast<double>(support);
  GridFunction g = f;
  for (Index c = 0; c < g.cells(); ++c)
    if (g[c] != 0.0) g[c] -= mean;
  if (l1_norm(g) <= 1e-12 * l1_norm(f)) throw std::invalid_argument("project_zero_mean: projection annihilates f");
  return g;
}

double first_moment(const MassPoints& m, const Vector& c) {
  return ((m.positions.colwise() - c).colwise().norm().transpose().array() * m.masses.array()).sum();
}

double first_moment(const GridFunction& f, const Vector& c) { return first_moment(mass_points(f), c); }

namespace {

double weighted_median(const Eigen::VectorXd& coords, const Eigen::VectorXd& weights) {
  std::vector<Index> order(static_cast<std::size_t>(coords.size()));
  for (Index i = 0; i < coords.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return coords[a] < coords[b]; });
  const double half = 0.5 * weights.sum();
  double acc = 0.0;
  for (Index i : order) {
    acc += weights[i];
    if (acc >= half) return coords[i];
  }
  return coords[order.back()];
}

}  // namespace

MomentMinimum min_first_moment(const MassPoints& m, double step) {
  if (m.size() == 0 || m.total() <= 0.0) throw std::invalid_argument("min_first_moment: zero function");
  const int d = static_cast<int>(m.positions.rows());
  MomentMinimum r;
  r.center.resize(d);
  for (int k = 0; k < d; ++k) r.center[k] = weighted_median(m.positions.row(k).transpose(), m.masses);
  r.initial_value = first_moment(m, r.center);
  r.value = r.initial_value;

  // Weiszfeld iterations from the better of the mean and the median.
  Vector c = m.positions * m.masses.matrix() / m.total();
  if (first_moment(m, c) > r.value) c = r.center;
  const double scale = (m.positions.colwise() - c).colwise().norm().maxCoeff() + 1.0;
  for (int it = 0; it < 2000; ++it) {
    Vector num = Vector::Zero(d);
    double den = 0.0;
    for (Index i = 0; i < m.size(); ++i) {
      const double dist = (m.positions.col(i) - c).norm();
      if (dist < 1e-14 * scale) continue;
      num += m.masses[i] / dist * m.positions.col(i);
      den += m.masses[i] / dist;
    }
    if (den == 0.0) break;
    const Vector next = num / den;
    const double moved = (next - c).norm();
    c = next;
    if (moved <= 1e-13 * scale) break;
  }
  if (const double v = first_moment(m, c); v < r.value) {
    r.value = v;
    r.center = c;
  }

  bool improved = true;
  int sweeps = 0;
  while (improved && sweeps++ < 10000) {
    improved = false;
    for (int k = 0; k < d; ++k) {
      for (double dir : {-1.0, 1.0}) {
        for (;;) {
          Vector trial = r.center;
          trial[k] += dir * step;
          const double v = first_moment(m, trial);
          if (v < r.value) {
            r.value = v;
            r.center = trial;
            improved = true;
          } else {
            break;
          }
        }
      }
    }
  }
  return r;
}

MomentMinimum min_first_moment(const GridFunction& f) { return min_first_moment(mass_points(f), f.grid.cell_size()); }

namespace {

double cubic_bspline(double u) {
  const double a = std::abs(u);
  if (a < 1.0) return 2.0 / 3.0 - a * a + 0.5 * a * a * a;
  if (a < 2.0) {
    const double t = 2.0 - a;
    return t * t * t / 6.0;
  }
  return 0.0;
}

}  // namespace

double bspline_bump(const Vector& x, double width) {
  double v = 1.0;
  for (Index k = 0; k < x.size(); ++k) v *= cubic_bspline(x[k] / width) / width;
  return v;
}

GridFunction make_bump(const GridSpec& grid, const Vector& center, double width) {
  const double h = grid.cell_size();
  if (width < 2.0 * h) throw std::invalid_argument("make_bump: width unresolved");
  for (int k = 0; k < grid.d; ++k)
    if (center[k] - 2.0 * width < -grid.half_width || center[k] + 2.0 * width > grid.half_width)
      throw std::invalid_argument("make_bump: bump leaves the grid box");

  // Separable samples, each axis normalized to unit discrete mass.
  std::vector<Eigen::VectorXd> axis(static_cast<std::size_t>(grid.d));
  for (int k = 0; k < grid.d; ++k) {
    Eigen::VectorXd a(grid.cells_per_axis);
    for (Index i = 0; i < grid.cells_per_axis; ++i) a[i] = cubic_bspline((grid.coordinate(i) - center[k]) / width);
    const double mass = a.sum() * h;
    if (!(mass > 0.0)) throw std::invalid_argument("make_bump: width unresolved");
    axis[static_cast<std::size_t>(k)] = a / mass;
  }
  GridFunction f(grid, 1);
  for (Index c = 0; c < f.cells(); ++c) {
    const IndexVector m = grid.unravel(c);
    double v = 1.0;
    for (int k = 0; k < grid.d && v != 0.0; ++k) v *= axis[static_cast<std::size_t>(k)][m[k]];
    f[c] = v;
  }
  return f;
}

GridFunction make_dipole(const DipoleSpec& spec, const GridSpec& grid) {
  grid.validate();
  const Vector origin = spec.origin.size() == 0 ? Vector::Zero(grid.d) : spec.origin;
  if (origin.size() != grid.d || spec.z.size() != grid.d) throw std::invalid_argument("make_dipole: dimension mismatch");
  if (!(spec.width > 0.0)) throw std::invalid_argument("make_dipole: width must be positive");
  if (spec.width < 2.0 * grid.cell_size()) throw std::invalid_argument("make_dipole: width unresolved");
  if (spec.z.cwiseAbs().maxCoeff() < 4.0 * spec.width) throw std::invalid_argument("make_dipole: poles overlap");
  const GridFunction first = make_bump(grid, origin, spec.width);
  const GridFunction second = make_bump(grid, origin + spec.z, spec.width);
  return first - second;
}

GridFunction make_random_bumps(int count, std::uint64_t seed, const GridSpec& grid) {
  grid.validate();
  if (count < 2) throw std::invalid_argument("make_random_bumps: need at least two bumps");
  const double h = grid.cell_size();
  const double w_lo = 4.0 * h;
  const double w_hi = std::max(w_lo, grid.half_width / 8.0);
  if (grid.half_width - 2.0 * w_lo - h < 0.0) throw std::invalid_argument("make_random_bumps: grid too coarse");
  Rng rng(seed);
  GridFunction f(grid, 1);
  for (int b = 0; b < count; ++b) {
    const double w = std::exp(rng.uniform(std::log(w_lo), std::log(w_hi)));
    const double reach = grid.half_width - 2.0 * w - h;
    Vector c(grid.d);
    for (int k = 0; k < grid.d; ++k) c[k] = rng.uniform(-0.5, 0.5) * reach;
    f = f + make_bump(grid, c, w) * rng.normal();
  }
  return project_zero_mean(f);
}

GridFunction dilate(const GridFunction& f, int n) {
  GridFunction g = f;
  g.grid.half_width = std::ldexp(f.grid.half_width, -n);
  g.values *= std::ldexp(1.0, n * f.grid.d);
  return g;
}

GridFunction translate(const GridFunction& f, const IndexVector& shift) {
  GridFunction g(f.grid, f.components);
  for (Index c = 0; c < f.cells(); ++c) {
    if ((f.values.col(c) == 0.0).all()) continue;
    IndexVector m = f.grid.unravel(c) + shift;
    if ((m.array() < 0).any() || (m.array() >= f.grid.cells_per_axis).any())
      throw std::invalid_argument("translate: support leaves the grid box");
    g.values.col(f.grid.ravel(m)) = f.values.col(c);
  }
  return g;
}

SupportBox support_box(const GridFunction& f) {
  SupportBox box;
  box.lo = Vector::Constant(f.grid.d, std::numeric_limits<double>::infinity());
  box.hi = Vector::Constant(f.grid.d, -std::numeric_limits<double>::infinity());
  for (Index c = 0; c < f.cells(); ++c) {
    if ((f.values.col(c) == 0.0).all()) continue;
    const Vector x = f.grid.center(c);
    box.lo = box.lo.cwiseMin(x);
    box.hi = box.hi.cwiseMax(x);
    box.empty = false;
  }
  return box;
}

namespace {

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  os.write(reinterpret_cast<const char*>(&bits), 8);
}

template <typename T>
T get_le(std::istream& is) {
  std::uint64_t bits = 0;
  if (!is.read(reinterpret_cast<char*>(&bits), 8)) throw std::runtime_error("grid function file truncated");
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

}  // namespace

void write_grid_function(const std::filesystem::path& path, const GridFunction& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  put_le<std::int64_t>(os, f.grid.d);
  put_le<std::int64_t>(os, f.components);
  put_le<std::int64_t>(os, f.grid.cells_per_axis);
  put_le<double>(os, f.grid.half_width);
  for (Index c = 0; c < f.cells(); ++c)
    for (int k = 0; k < f.components; ++k) put_le<double>(os, f.values(k, c));

  nlohmann::json meta = {{"d", f.grid.d},
                         {"components", f.components},
                         {"cells_per_axis", f.grid.cells_per_axis},
                         {"half_width", f.grid.half_width},
                         {"cell_size", f.grid.cell_size()},
                         {"layout", "row-major cells, component fastest, float64 little-endian"},
                         {"header_bytes", 32},
                         {"values_file", path.filename().string()}};
  std::ofstream js(path.string() + ".json");
  js << meta.dump(2) << "\n";
}

GridFunction read_grid_function(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  GridSpec g;
  g.d = static_cast<int>(get_le<std::int64_t>(is));
  const int comps = static_cast<int>(get_le<std::int64_t>(is));
  g.cells_per_axis = get_le<std::int64_t>(is);
  g.half_width = get_le<double>(is);
  if (g.d < 1 || g.d > 8 || comps < 1) throw std::runtime_error("grid function header is malformed");
  g.validate();
  GridFunction f(g, comps);
  for (Index c = 0; c < f.cells(); ++c)
    for (int k = 0; k < comps; ++k) f.values(k, c) = get_le<double>(is);
  if (!f.values.allFinite()) throw std::runtime_error("grid function contains non-finite values");
  return f;
}

}  // namespace mazya
