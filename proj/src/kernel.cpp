#include "mazya/kernel.hpp"

#include "mazya/fft.hpp"

#include <complex>
#include <stdexcept>

namespace mazya {

KernelSpec KernelSpec::identity(int d, double alpha) {
  KernelSpec k;
  k.d = d;
  k.ell = d;
  k.alpha = alpha;
  k.name = "identity";
  k.profile = [](const Vector& u) { return u; };
  k.lipschitz_bound = 1.0;
  k.profile_sup = 1.0;
  k.validate();
  return k;
}

KernelSpec KernelSpec::sign(double alpha) {
  KernelSpec k;
  k.d = 1;
  k.ell = 1;
  k.alpha = alpha;
  k.name = "sign";
  k.profile = [](const Vector& u) { return Vector::Constant(1, u[0] < 0.0 ? -1.0 : 1.0); };
  k.lipschitz_bound = 1.0;
  k.profile_sup = 1.0;
  k.validate();
  return k;
}

KernelSpec KernelSpec::custom(int d, int ell, double alpha, SphereProfile profile, double lipschitz, std::string name,
                              std::optional<double> sup) {
  KernelSpec k;
  k.d = d;
  k.ell = ell;
  k.alpha = alpha;
  k.name = std::move(name);
  k.profile = std::move(profile);
  k.lipschitz_bound = lipschitz;
  if (sup) {
    k.profile_sup = *sup;
  } else {
    Rng rng(0x5eed);
    double m = 0.0;
    for (int i = 0; i < 4096; ++i) m = std::max(m, k.profile(rng.unit_vector(d)).norm());
    if (d == 1) m = std::max({m, k.profile(Vector::Constant(1, 1.0)).norm(), k.profile(Vector::Constant(1, -1.0)).norm()});
    k.profile_sup = m;
  }
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  if (d < 1 || ell < 1) throw std::invalid_argument("kernel: d and ell must be positive");
  if (!(alpha > 0.0 && alpha < d)) throw std::invalid_argument("kernel: alpha must lie in (0, d)");
  if (!profile) throw std::invalid_argument("kernel: missing sphere profile");
  Vector u = Vector::Zero(d);
  u[0] = 1.0;
  const Vector v = profile(u);
  if (v.size() != ell || !v.allFinite()) throw std::invalid_argument("kernel: profile must return a finite R^ell vector");
}

BandRange BandRange::between(int lo, int hi) {
  if (lo > hi) throw std::invalid_argument("band range: lo must not exceed hi");
  return {lo, hi};
}

std::string BandRange::label() const {
  return (lo ? "[" + std::to_string(*lo) : std::string("(-inf")) + "," + std::to_string(hi) + "]";
}

Vector eval_kernel(const KernelSpec& spec, const Vector& x) {
  const double r = x.norm();
  if (r == 0.0) throw std::domain_error("kernel singular at origin");
  return std::pow(r, spec.alpha - spec.d) * spec.profile(x / r);
}

Vector eval_band(const KernelSpec& spec, int n, const Vector& x) {
  const double r = x.norm();
  if (r < std::ldexp(1.0, -n - 1) || r > std::ldexp(1.0, -n)) return Vector::Zero(spec.ell);
  return eval_kernel(spec, x);
}

Vector eval_band_sum(const KernelSpec& spec, const BandRange& range, const Vector& x) {
  const double r = x.norm();
  if (r == 0.0 || r < range.inner_radius()) return Vector::Zero(spec.ell);
  if (range.lo && r > std::ldexp(1.0, -*range.lo)) return Vector::Zero(spec.ell);
  return eval_kernel(spec, x);
}

int finest_resolved_band(double cell_size) {
  // h <= 2^{-n-3}  <=>  n <= -log2(h) - 3
  int e = 0;
  const double m = std::frexp(cell_size, &e);  // h = m 2^e, m in [0.5, 1)
  const int ceil_log2 = (m == 0.5) ? e - 1 : e;
  return -ceil_log2 - 3;
}

namespace {

struct CellAverager {
  const KernelSpec& spec;
  double r_in;
  double r_out;
  Index refined = 0;

  static constexpr int max_depth = 3;

  void value_at(const Vector& c, double weight, Eigen::Ref<Eigen::ArrayXd> acc) const {
    const double r = c.norm();
    if (r == 0.0 || r < r_in || r > r_out) return;
    acc += weight * (std::pow(r, spec.alpha - spec.d) * spec.profile(c / r)).array();
  }

  // Adds weight * (average of K_range over the box) to acc.
  void integrate(const Vector& c, double half, int depth, double weight, Eigen::Ref<Eigen::ArrayXd> acc) {
    double rmin2 = 0.0;
    double rmax2 = 0.0;
    for (Index k = 0; k < c.size(); ++k) {
      const double a = c[k] - half;
      const double b = c[k] + half;
      const double near = (a <= 0.0 && b >= 0.0) ? 0.0 : std::min(std::abs(a), std::abs(b));
      const double far = std::max(std::abs(a), std::abs(b));
      rmin2 += near * near;
      rmax2 += far * far;
    }
    const double rmin = std::sqrt(rmin2);
    const double rmax = std::sqrt(rmax2);
    if (rmax < r_in || rmin > r_out) return;
    const bool straddles = (rmin < r_in && rmax > r_in) || (rmin < r_out && rmax > r_out);
    if (!straddles || depth == max_depth) {
      value_at(c, weight, acc);
      return;
    }
    if (depth == 0) ++refined;
    const int d = static_cast<int>(c.size());
    Index subcells = 1;
    for (int k = 0; k < d; ++k) subcells *= 4;
    const double sub_weight = weight / static_cast<double>(subcells);
    constexpr double pos[4] = {-0.75, -0.25, 0.25, 0.75};
    Vector sc(d);
    for (Index s = 0; s < subcells; ++s) {
      Index t = s;
      for (int k = d - 1; k >= 0; --k) {
        sc[k] = c[k] + pos[t % 4] * half;
        t /= 4;
      }
      integrate(sc, 0.25 * half, depth + 1, sub_weight, acc);
    }
  }
};

}  // namespace

KernelStencil build_stencil(const KernelSpec& spec, int lo, int hi, double cell_size, Index radius) {
  KernelStencil st;
  st.d = spec.d;
  st.ell = spec.ell;
  st.cell_size = cell_size;
  st.radius = radius;
  const Index w = st.width();
  Index count = 1;
  for (int k = 0; k < spec.d; ++k) count *= w;
  st.weights = Eigen::ArrayXXd::Zero(spec.ell, count);

  CellAverager avg{spec, std::ldexp(1.0, -hi - 1), std::ldexp(1.0, -lo)};
  const double vol = std::pow(cell_size, spec.d);
  Vector c(spec.d);
  for (Index s = 0; s < count; ++s) {
    Index t = s;
    for (int k = spec.d - 1; k >= 0; --k) {
      c[k] = static_cast<double>(t % w - radius) * cell_size;
      t /= w;
    }
    avg.integrate(c, 0.5 * cell_size, 0, vol, st.weights.col(s));
  }
  st.refined_cells = avg.refined;
  return st;
}

namespace {

Index ipow(Index b, int e) {
  Index r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

void convolve_direct(const GridFunction& f, const KernelStencil& st, Index pad, GridFunction& out) {
  const int d = f.grid.d;
  const Index n_in = f.grid.cells_per_axis;
  const Index n_out = out.grid.cells_per_axis;
  const Index w = st.width();

  std::vector<Index> offsets;
  for (Index s = 0; s < st.weights.cols(); ++s)
    if ((st.weights.col(s) != 0.0).any()) offsets.push_back(s);
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> om(d, static_cast<Index>(offsets.size()));
  for (Index q = 0; q < static_cast<Index>(offsets.size()); ++q) {
    Index t = offsets[static_cast<std::size_t>(q)];
    for (int k = d - 1; k >= 0; --k) {
      om(k, q) = t % w - st.radius;
      t /= w;
    }
  }

  IndexVector base(d);
  for (Index j = 0; j < f.cells(); ++j) {
    const double fj = f[j];
    if (fj == 0.0) continue;
    Index t = j;
    for (int k = d - 1; k >= 0; --k) {
      base[k] = t % n_in + pad;
      t /= n_in;
    }
    for (Index q = 0; q < om.cols(); ++q) {
      Index lin = 0;
      bool inside = true;
      for (int k = 0; k < d; ++k) {
        const Index v = base[k] + om(k, q);
        if (v < 0 || v >= n_out) {
          inside = false;
          break;
        }
        lin = lin * n_out + v;
      }
      if (inside) out.values.col(lin) += fj * st.weights.col(offsets[static_cast<std::size_t>(q)]);
    }
  }
}

void convolve_fast(const GridFunction& f, const KernelStencil& st, Index pad, GridFunction& out, Index max_cells) {
  const int d = f.grid.d;
  const Index n_in = f.grid.cells_per_axis;
  const Index n_out = out.grid.cells_per_axis;
  const Index w = st.width();
  const Index len = detail::next_power_of_two(n_in + w - 1);
  const Index total = ipow(len, d);
  if (total > max_cells) throw std::runtime_error("convolve: memory bound exceeded (FFT buffer)");

  auto lin_of = [&](const IndexVector& m) {
    Index lin = 0;
    for (int k = 0; k < d; ++k) lin = lin * len + m[k];
    return lin;
  };

  std::vector<std::complex<double>> fhat(static_cast<std::size_t>(total));
  for (Index j = 0; j < f.cells(); ++j) {
    if (f[j] == 0.0) continue;
    fhat[static_cast<std::size_t>(lin_of(f.grid.unravel(j)))] = f[j];
  }
  detail::fft_nd(fhat, d, len, false);

  IndexVector m(d);
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(total));
  for (int comp = 0; comp < st.ell; ++comp) {
    std::fill(buf.begin(), buf.end(), std::complex<double>{});
    for (Index s = 0; s < st.weights.cols(); ++s) {
      const double v = st.weights(comp, s);
      if (v == 0.0) continue;
      Index t = s;
      for (int k = d - 1; k >= 0; --k) {
        m[k] = t % w;
        t /= w;
      }
      buf[static_cast<std::size_t>(lin_of(m))] = v;
    }
    detail::fft_nd(buf, d, len, false);
    for (Index q = 0; q < total; ++q) buf[static_cast<std::size_t>(q)] *= fhat[static_cast<std::size_t>(q)];
    detail::fft_nd(buf, d, len, true);

    // Output cell i sits at input-grid index i - pad; the linear
    // convolution index is (i - pad) + radius.
    for (Index i = 0; i < out.cells(); ++i) {
      Index t = i;
      bool inside = true;
      for (int k = d - 1; k >= 0; --k) {
        const Index v = t % n_out - pad + st.radius;
        t /= n_out;
        if (v < 0 || v >= len) inside = false;
        m[k] = v;
      }
      if (inside) out.values(comp, i) = buf[static_cast<std::size_t>(lin_of(m))].real();
    }
  }
}

}  // namespace

Convolution convolve_detailed(const KernelSpec& spec, const BandRange& range, const GridFunction& f,
                              ConvolveMethod method, const ConvolveOptions& opts) {
  f.grid.validate();
  if (f.components != 1) throw std::invalid_argument("convolve: scalar input function expected");
  if (f.grid.d != spec.d) throw std::invalid_argument("convolve: grid dimension differs from kernel dimension");
  if (range.lo && *range.lo > range.hi) throw std::invalid_argument("band range: lo must not exceed hi");
  const double h = f.grid.cell_size();
  if (h > range.inner_radius() / 4.0) throw std::invalid_argument("band unresolved");

  Convolution res;
  res.hi = range.hi;
  res.lo = range.lo ? *range.lo : std::min(opts.lo_min, range.hi);
  res.outer_radius = std::ldexp(1.0, -res.lo);

  const double R = f.grid.half_width;
  const double reach = res.outer_radius + h * std::sqrt(static_cast<double>(spec.d));
  double r_out = R;
  if (opts.output_half_width) {
    r_out = *opts.output_half_width;
    double ratio = r_out / R;
    int e = 0;
    if (!(ratio >= 1.0) || std::frexp(ratio, &e) != 0.5)
      throw std::invalid_argument("convolve: output half width must be a power-of-two multiple of the input half width");
  } else {
    const double need = std::min(reach, opts.far_field_factor * R);
    while (r_out - R < need) r_out *= 2.0;
  }
  res.truncated = (r_out - R) < reach;

  GridSpec og = f.grid;
  og.half_width = r_out;
  og.cells_per_axis = static_cast<Index>(std::llround(static_cast<double>(f.grid.cells_per_axis) * r_out / R));
  if (ipow(og.cells_per_axis, spec.d) * spec.ell > opts.max_cells)
    throw std::runtime_error("convolve: memory bound exceeded (output grid)");
  const Index pad = (og.cells_per_axis - f.grid.cells_per_axis) / 2;

  const Index reach_cells = static_cast<Index>(std::ceil(res.outer_radius / h + 0.5 * std::sqrt(static_cast<double>(spec.d))));
  const Index radius = std::min(reach_cells, pad + f.grid.cells_per_axis - 1);
  if (ipow(2 * radius + 1, spec.d) * spec.ell > opts.max_cells)
    throw std::runtime_error("convolve: memory bound exceeded (kernel stencil)");

  const KernelStencil st = build_stencil(spec, res.lo, res.hi, h, radius);
  res.refined_cells = st.refined_cells;
  res.out = GridFunction(og, spec.ell);
  if (method == ConvolveMethod::direct)
    convolve_direct(f, st, pad, res.out);
  else
    convolve_fast(f, st, pad, res.out, opts.max_cells);
  return res;
}

GridFunction convolve(const KernelSpec& spec, const BandRange& range, const GridFunction& f, ConvolveMethod method,
                      const ConvolveOptions& opts) {
  return convolve_detailed(spec, range, f, method, opts).out;
}

}  // namespace mazya
