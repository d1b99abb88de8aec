#include "mazya/extremize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace mazya {

Vector project_parameters(const FamilySpec& family, const Vector& params) {
  const int d = family.grid.d;
  const int stride = d + 2;
  if (params.size() != family.dimension()) throw std::invalid_argument("family: parameter vector has the wrong size");
  Vector out = params;
  const double R = family.grid.half_width;
  const double lo = std::log(family.min_width()), hi = std::log(family.max_width());
  if (lo > hi) throw std::invalid_argument("family: unresolved bumps (8h exceeds R/2)");
  double mean = 0.0;
  for (int b = 0; b < family.bumps; ++b) {
    const Index base = b * stride;
    double& lw = out[base + d];
    lw = std::clamp(std::isfinite(lw) ? lw : lo, lo, hi);
    const double reach = std::max(0.0, R - 2.0 * std::exp(lw));
    for (int a = 0; a < d; ++a) {
      double& c = out[base + a];
      c = std::clamp(std::isfinite(c) ? c : 0.0, -reach, reach);
    }
    if (!std::isfinite(out[base + d + 1])) out[base + d + 1] = 0.0;
    mean += out[base + d + 1];
  }
  mean /= family.bumps;
  for (int b = 0; b < family.bumps; ++b) out[b * stride + d + 1] -= mean;
  return out;
}

GridFunction realize(const FamilySpec& family, const Vector& params) {
  const int d = family.grid.d;
  const int stride = d + 2;
  GridFunction f(family.grid, 1);
  for (int b = 0; b < family.bumps; ++b) {
    const Index base = b * stride;
    const double weight = params[base + d + 1];
    if (weight == 0.0) continue;
    const double w = std::exp(params[base + d]);
    if (w < 4.0 * family.grid.cell_size()) throw std::invalid_argument("family: bump width unresolved");
    f.values += weight * make_bump(family.grid, params.segment(base, d), w).values;
  }
  return f;
}

Vector baseline_parameters(const FamilySpec& family) {
  const int d = family.grid.d;
  const int stride = d + 2;
  const double R = family.grid.half_width;
  Vector x = Vector::Zero(family.dimension());
  const double w = std::clamp(R / 16.0, family.min_width(), family.max_width());
  for (int b = 0; b < family.bumps; ++b) {
    x[b * stride + d] = std::log(w);
    if (b == 0) x[b * stride] = -0.25 * R;
    if (b == 1) x[b * stride] = 0.25 * R;
  }
  if (family.bumps >= 2) {
    x[d + 1] = 1.0;
    x[stride + d + 1] = -1.0;
  }
  return project_parameters(family, x);
}

namespace {

struct RestartOutcome {
  Vector best;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  long long evaluations = 0;
};

class Objective {
 public:
  Objective(const KernelSpec& spec, const PhiSpec& phi, const FamilySpec& family, const VerifyOptions& opts, long long budget,
            RestartOutcome& out)
      : spec_(spec), phi_(phi), family_(family), opts_(opts), budget_(budget), out_(out) {}

  bool exhausted() const { return out_.evaluations >= budget_; }

  double operator()(const Vector& x) {
    const Vector y = project_parameters(family_, x);
    const GridFunction f = realize(family_, y);
    double v = main_ratio(spec_, phi_, f, opts_).ratio;
    if (std::isnan(v)) v = -std::numeric_limits<double>::infinity();
    ++out_.evaluations;
    if (v > out_.best_value || out_.best.size() == 0) {
      out_.best_value = v;
      out_.best = y;
    }
    out_.trace.push_back(out_.best_value);
    return v;
  }

 private:
  const KernelSpec& spec_;
  const PhiSpec& phi_;
  const FamilySpec& family_;
  const VerifyOptions& opts_;
  long long budget_;
  RestartOutcome& out_;
};

Vector random_start(const FamilySpec& family, Rng& rng) {
  const int d = family.grid.d;
  const int stride = d + 2;
  const double lo = std::log(family.min_width()), hi = std::log(family.max_width());
  Vector x(family.dimension());
  for (int b = 0; b < family.bumps; ++b) {
    const Index base = b * stride;
    x[base + d] = rng.uniform(lo, hi);
    const double reach = std::max(0.0, family.grid.half_width - 2.0 * std::exp(x[base + d]));
    for (int a = 0; a < d; ++a) x[base + a] = rng.uniform(-reach, reach);
    x[base + d + 1] = rng.normal();
  }
  return project_parameters(family, x);
}

Vector simplex_steps(const FamilySpec& family) {
  const int d = family.grid.d;
  const int stride = d + 2;
  Vector s(family.dimension());
  for (int b = 0; b < family.bumps; ++b) {
    for (int a = 0; a < d; ++a) s[b * stride + a] = 0.1 * family.grid.half_width;
    s[b * stride + d] = 0.5;
    s[b * stride + d + 1] = 0.5;
  }
  return s;
}

// Maximizes by minimizing the negated objective.
void nelder_mead(Objective& obj, const Vector& start, const Vector& steps) {
  const Index n = start.size();
  std::vector<Vector> pts;
  std::vector<double> val;
  pts.push_back(start);
  val.push_back(-obj(start));
  for (Index i = 0; i < n; ++i) {
    if (obj.exhausted()) return;
    Vector v = start;
    v[i] += steps[i];
    pts.push_back(v);
    val.push_back(-obj(v));
  }
  std::vector<std::size_t> order(pts.size());
  while (!obj.exhausted()) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
    Vector centroid = Vector::Zero(n);
    for (std::size_t k = 0; k + 1 < order.size(); ++k) centroid += pts[order[k]];
    centroid /= static_cast<double>(n);

    const Vector xr = centroid + (centroid - pts[worst]);
    const double fr = -obj(xr);
    if (fr < val[best]) {
      if (obj.exhausted()) {
        pts[worst] = xr;
        val[worst] = fr;
        return;
      }
      const Vector xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = -obj(xe);
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
      continue;
    }
    if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
      continue;
    }
    if (obj.exhausted()) return;
    const bool outside = fr < val[worst];
    const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid)) : Vector(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = -obj(xc);
    if (fc < (outside ? fr : val[worst])) {
      pts[worst] = xc;
      val[worst] = fc;
      continue;
    }
    for (std::size_t k = 1; k < order.size(); ++k) {
      if (obj.exhausted()) return;
      const std::size_t i = order[k];
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      val[i] = -obj(pts[i]);
    }
  }
}

}  // namespace

SearchResult search(const KernelSpec& spec, const PhiSpec& phi, const FamilySpec& family, const SearchOptions& opts) {
  family.grid.validate();
  if (family.bumps < 2) throw std::invalid_argument("search: at least two bumps required");
  check_consistency(phi, spec);
  const long long simplex = family.dimension() + 1;
  if (opts.budget < simplex)
    throw std::invalid_argument("search: budget " + std::to_string(opts.budget) + " is below the simplex size " +
                                std::to_string(simplex));
  const int restarts = static_cast<int>(std::min<long long>(std::max(1, family.restarts), opts.budget / simplex));
  std::vector<long long> budgets(static_cast<std::size_t>(restarts), opts.budget / restarts);
  budgets[0] += opts.budget % restarts;

  std::vector<Vector> starts;
  starts.push_back(baseline_parameters(family));
  Rng rng(family.seed);
  for (int r = 1; r < restarts; ++r) starts.push_back(random_start(family, rng));
  const Vector steps = simplex_steps(family);

  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(restarts));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < restarts; r = next++) {
      Objective obj(spec, phi, family, opts.verify, budgets[static_cast<std::size_t>(r)], outcomes[static_cast<std::size_t>(r)]);
      nelder_mead(obj, starts[static_cast<std::size_t>(r)], steps);
    }
  };
  const int threads = std::clamp(opts.threads, 1, restarts);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  SearchResult res;
  res.restarts = restarts;
  res.best_ratio = -std::numeric_limits<double>::infinity();
  double running = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    const RestartOutcome& o = outcomes[static_cast<std::size_t>(r)];
    res.evaluations += o.evaluations;
    for (double v : o.trace) {
      running = std::max(running, v);
      res.trace.push_back(running);
    }
    if (o.best_value > res.best_ratio) {
      res.best_ratio = o.best_value;
      res.best_params = o.best;
      res.best_restart = r;
    }
  }
  res.baseline_ratio = outcomes[0].trace.empty() ? 0.0 : outcomes[0].trace.front();
  return res;
}

std::vector<TableRow> constant_table(const std::vector<TableEntry>& entries, const SearchOptions& opts) {
  std::vector<TableRow> rows;
  for (const TableEntry& e : entries) {
    const SearchResult s = search(e.kernel, e.phi, e.family, opts);
    rows.push_back({e.id, e.kernel.name, e.phi.name, s.best_ratio, s.baseline_ratio, s.evaluations});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const TableRow& a, const TableRow& b) { return a.id < b.id; });
  return rows;
}

}  // namespace mazya
