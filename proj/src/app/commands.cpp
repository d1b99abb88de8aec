#include "mazya/app/commands.hpp"

#include "mazya/app/plot.hpp"
#include "mazya/app/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <thread>

namespace mazya::app {

namespace {

using Task = std::function<std::vector<InequalityReport>()>;

void say(const CommandOptions& opts, const std::string& line) {
  if (opts.log) *opts.log << line << "\n";
}

std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void label(InequalityReport& r, const RunConfig& cfg, const std::string& f_id) {
  r.kernel_id = cfg.kernel_id;
  r.phi_id = cfg.phi_id;
  r.f_id = f_id;
}

std::vector<InequalityReport> run_tasks(const std::vector<Task>& tasks, int threads) {
  std::vector<std::vector<InequalityReport>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::clamp(threads, 1, std::max(1, static_cast<int>(tasks.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<InequalityReport> rows;
  for (auto& r : results) rows.insert(rows.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  return rows;
}

GridFunction rescaled(const GridFunction& f, double lambda) {
  // f(x / lambda) / lambda^d keeps the L1 norm
  GridFunction g = f;
  g.grid.half_width *= lambda;
  g.values /= std::pow(lambda, f.grid.d);
  return g;
}

Cube grid_cube(const GridSpec& g) { return {Vector::Constant(g.d, -g.half_width), 2.0 * g.half_width}; }

bool wants(const RunConfig& cfg, const std::string& id) {
  for (const std::string& s : cfg.statements) {
    if (s == id) return true;
    if (s == "aux" && id.rfind("aux_", 0) == 0) return true;
  }
  return false;
}

void check_growth(std::vector<InequalityReport>& rows, const std::vector<SuiteFunction>& fns, double growth) {
  std::map<std::string, const SuiteFunction*> by_id;
  for (const SuiteFunction& s : fns) by_id[s.id] = &s;
  std::map<double, std::vector<std::pair<int, InequalityReport*>>> by_scale;
  for (InequalityReport& r : rows) {
    if (r.statement != statement::main_ratio) continue;
    const auto it = by_id.find(r.f_id);
    if (it != by_id.end()) by_scale[it->second->scale].emplace_back(it->second->width_exponent, &r);
  }
  for (auto& [scale, seq] : by_scale) {
    std::sort(seq.begin(), seq.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < seq.size(); ++i) {
      InequalityReport& r = *seq[i].second;
      const double prev = seq[i - 1].second->ratio;
      if (r.ratio > growth * prev) {
        r.verdict = "fail";
        r.notes += "; grew by " + tag(safe_ratio(r.ratio, prev)) + " over the previous width";
      }
    }
  }
}

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_double(v)); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

std::vector<SuiteFunction> suite_functions(const RunConfig& cfg) {
  const int d = cfg.grid.d;
  Vector z = Vector::Zero(d);
  z[0] = cfg.separation;
  std::vector<SuiteFunction> out;
  for (int k : cfg.width_exponents) {
    const GridFunction base = make_dipole({-0.5 * z, z, std::ldexp(1.0, -k)}, cfg.grid);
    for (double s : cfg.scales)
      out.push_back({"dipole_w" + std::to_string(k) + "_s" + tag(s), k, s, rescaled(base, s)});
  }
  return out;
}

std::vector<InequalityReport> verify_suite(const RunConfig& cfg, int threads, double amplitude) {
  const KernelSpec& spec = cfg.kernel;
  const PhiSpec& phi = cfg.phi;
  const VerifyOptions& vo = cfg.verify;
  const double p = spec.p();
  check_consistency(phi, spec);

  std::vector<SuiteFunction> fns = suite_functions(cfg);
  for (SuiteFunction& s : fns) s.f.values *= amplitude;

  std::vector<Task> tasks;
  auto single = [&](const std::string& id, const std::string& f_id, std::function<InequalityReport()> fn) {
    if (!wants(cfg, id)) return;
    tasks.push_back([&cfg, f_id, fn] {
      InequalityReport r = fn();
      label(r, cfg, f_id);
      return std::vector<InequalityReport>{r};
    });
  };

  for (const SuiteFunction& s : fns) {
    const GridFunction* f = &s.f;
    single(statement::main_ratio, s.id, [&, f] { return main_ratio(spec, phi, *f, vo); });
    single(statement::main2_partial, s.id, [&, f] { return main2_partial(spec, phi, *f, std::nullopt, vo); });
    single(statement::remainder_partial, s.id, [&, f] { return remainder_partial(spec, *f, std::nullopt, p, vo); });
    const int top = effective_hi(*f, vo) - 1;
    for (int n : cfg.levels) {
      if (n < 0 || n > top) continue;
      if (p <= 2.0)
        single(statement::second_lemma, s.id, [&, f, n] { return second_lemma_check(spec, phi, *f, n, vo); });
      single(statement::median_bound, s.id, [&, f, n] { return median_bound_check(spec, phi, *f, n, vo); });
      single(statement::local_main2, s.id, [&, f, n] { return local_main2_check(spec, phi, *f, n, vo); });
    }
    single(statement::telescope, s.id, [&, f] {
      const TelescopeResult t = telescope_check(*f, grid_cube(f->grid), p, cfg.telescope_depth);
      InequalityReport r = make_report(statement::telescope, t.norm_power - t.energies.back(), t.partial_sums.back());
      r.verdict = t.ok() ? "pass" : "fail";
      r.notes = "defect " + tag(t.defect);
      return r;
    });
    single(statement::energy_increment, s.id, [&, f] {
      const IncrementCheck c = energy_increment_lemma_check(*f, grid_cube(f->grid), p, cfg.telescope_depth, cfg.increment_eps);
      InequalityReport r = make_report(statement::energy_increment, c.lhs, c.rhs);
      r.ratio = c.ratio;
      return r;
    });
  }

  if (wants(cfg, statement::first_lemma)) {
    const int d = cfg.grid.d;
    Vector z = Vector::Zero(d);
    z[0] = 0.5 * cfg.separation;
    for (int k : cfg.width_exponents) {
      const GridFunction inner = make_dipole({-0.5 * z, z, std::ldexp(1.0, -k - 1)}, cfg.grid) * amplitude;
      tasks.push_back([&cfg, &spec, &vo, inner, k] {
        InequalityReport r = first_lemma_check(spec, inner, vo);
        label(r, cfg, "inner_w" + std::to_string(k + 1));
        return std::vector<InequalityReport>{r};
      });
    }
  }

  for (const char* id : {statement::aux_k1, statement::aux_k2, statement::aux_k3, statement::aux_phi1}) {
    if (!wants(cfg, id)) continue;
    const std::string sid = id;
    if (sid == statement::aux_k2 && std::abs(p - 2.0) > 1e-12) continue;
    if ((sid == statement::aux_k2 || sid == statement::aux_k3) && spec.d > 2) continue;
    tasks.push_back([&cfg, &spec, &phi, sid] {
      InequalityReport r;
      if (sid == statement::aux_k1) r = aux_k1(spec, cfg.aux);
      else if (sid == statement::aux_k2) r = aux_k2(spec, cfg.aux);
      else if (sid == statement::aux_k3) r = aux_k3(spec, cfg.aux);
      else r = aux_phi1(phi, cfg.aux);
      label(r, cfg, "none");
      return std::vector<InequalityReport>{r};
    });
  }

  std::vector<InequalityReport> rows = run_tasks(tasks, threads);
  check_growth(rows, fns, cfg.growth_factor);
  sort_reports(rows);
  return rows;
}

std::vector<InequalityReport> cancellation_rows(const RunConfig& cfg, const CancellationResult& c) {
  std::vector<InequalityReport> rows;
  for (int sign : {+1, -1}) {
    const double res = sign > 0 ? c.residual_plus : c.residual_minus;
    InequalityReport r = make_report("cancellation", std::abs(res), c.threshold, c.quadrature_error);
    r.verdict = (sign > 0 ? c.cancels_plus : c.cancels_minus) ? "cancels" : "fails";
    label(r, cfg, sign > 0 ? "plus" : "minus");
    rows.push_back(r);
  }
  sort_reports(rows);
  return rows;
}

int run_check_cancellation(const RunConfig& cfg, const CommandOptions& opts) {
  const CancellationResult c = check_cancellation(cfg.phi, cfg.kernel, cfg.quadrature, cfg.cancellation_tol);
  std::filesystem::create_directories(opts.out);
  const std::vector<InequalityReport> rows = cancellation_rows(cfg, c);
  write_csv(opts.out / "cancellation.csv", rows, cfg.digest);
  nlohmann::ordered_json j;
  j["kernel_id"] = cfg.kernel_id;
  j["phi_id"] = cfg.phi_id;
  j["quadrature_nodes"] = cfg.quadrature.size();
  j["residual_plus"] = number(c.residual_plus);
  j["residual_minus"] = number(c.residual_minus);
  j["normalizer"] = number(c.normalizer);
  j["quadrature_error"] = number(c.quadrature_error);
  j["threshold"] = number(c.threshold);
  j["verdict"] = c.cancels() ? "cancels" : "fails";
  j["config_digest"] = cfg.digest;
  write_text(opts.out / "cancellation.json", j.dump(2) + "\n");
  say(opts, "residual_plus " + format_double(c.residual_plus) + " residual_minus " + format_double(c.residual_minus) +
                " threshold " + format_double(c.threshold) + " verdict " + (c.cancels() ? "cancels" : "fails"));
  return c.cancels() ? exit_ok : exit_fail;
}

int run_convolve(const RunConfig& cfg, const CommandOptions& opts) {
  if (!opts.input) throw std::runtime_error("convolve: --input FILE is required");
  if (!std::filesystem::exists(*opts.input)) throw std::runtime_error("input file '" + opts.input->string() + "' not found");
  const GridFunction f = read_grid_function(*opts.input);
  if (f.grid.d != cfg.kernel.d) throw std::runtime_error("convolve: input dimension differs from the kernel dimension");
  const int hi = effective_hi(f, cfg.verify);
  if (cfg.band_lo && *cfg.band_lo > hi) throw std::runtime_error("convolve: bands.lo exceeds bands.hi");
  const BandRange range{cfg.band_lo, hi};
  const Convolution c = convolve_detailed(cfg.kernel, range, f, cfg.verify.method, cfg.verify.convolve);
  std::filesystem::create_directories(opts.out);
  const std::filesystem::path path = opts.out / (opts.input->stem().string() + "_conv.bin");
  write_grid_function(path, c.out);
  say(opts, "bands " + range.label() + " R_out " + format_double(c.outer_radius) + (c.truncated ? " truncated" : "") +
                " -> " + path.string());
  return exit_ok;
}

int run_verify(const RunConfig& cfg, const CommandOptions& opts) {
  const std::vector<InequalityReport> rows = verify_suite(cfg, opts.threads);
  std::filesystem::create_directories(opts.out);
  write_csv(opts.out / "report.csv", rows, cfg.digest);
  std::map<std::string, int> counts;
  for (const InequalityReport& r : rows) ++counts[r.verdict];
  std::string summary = std::to_string(rows.size()) + " rows";
  for (const auto& [v, n] : counts) summary += ", " + std::to_string(n) + " " + v;
  say(opts, summary);
  for (const InequalityReport& r : rows)
    if (r.verdict == "fail")
      say(opts, "FAIL " + r.statement + " " + r.f_id + (r.n ? " n=" + std::to_string(*r.n) : "") + " ratio " +
                    format_double(r.ratio) + (r.notes.empty() ? "" : " (" + r.notes + ")"));
  return any_failure(rows) ? exit_fail : exit_ok;
}

int run_probe(const RunConfig& cfg, const CommandOptions& opts) {
  const ProbeResult res = cancellation_necessity_probe(cfg.kernel, cfg.phi, cfg.probe, cfg.verify);
  std::vector<InequalityReport> rows = res.reports;
  for (InequalityReport& r : rows) label(r, cfg, r.f_id);
  sort_reports(rows);
  std::filesystem::create_directories(opts.out);
  write_csv(opts.out / "probe.csv", rows, cfg.digest);
  std::string ratios;
  for (double v : res.ratios) ratios += " " + format_double(v);
  say(opts, std::string("status ") + to_string(res.status) + ", max step " + format_double(res.max_step_factor) +
                ", ratios" + ratios);
  return any_failure(rows) ? exit_fail : exit_ok;
}

int run_extremize(const RunConfig& cfg, const CommandOptions& opts) {
  const CancellationResult c = check_cancellation(cfg.phi, cfg.kernel, cfg.quadrature, cfg.cancellation_tol);
  if (!c.cancels() && !opts.force)
    throw std::runtime_error("extremize: Phi fails the cancellation conditions, so the constant is infinite; pass --force to search anyway");
  SearchOptions so;
  so.budget = cfg.budget;
  so.threads = opts.threads;
  so.verify = cfg.verify;
  const SearchResult res = search(cfg.kernel, cfg.phi, cfg.family, so);

  std::vector<InequalityReport> rows;
  InequalityReport base = main_ratio(cfg.kernel, cfg.phi, realize(cfg.family, baseline_parameters(cfg.family)), cfg.verify);
  base.statement = statement::extremize;
  label(base, cfg, "baseline");
  rows.push_back(base);
  InequalityReport best = main_ratio(cfg.kernel, cfg.phi, realize(cfg.family, res.best_params), cfg.verify);
  best.statement = statement::extremize;
  label(best, cfg, "best");
  rows.push_back(best);
  sort_reports(rows);
  std::filesystem::create_directories(opts.out);
  write_csv(opts.out / "extremize.csv", rows, cfg.digest);

  nlohmann::ordered_json j;
  j["kernel_id"] = cfg.kernel_id;
  j["phi_id"] = cfg.phi_id;
  j["config_digest"] = cfg.digest;
  j["seed"] = cfg.family.seed;
  j["budget"] = cfg.budget;
  j["evaluations"] = res.evaluations;
  j["restarts"] = res.restarts;
  j["best_restart"] = res.best_restart;
  j["best_ratio"] = number(res.best_ratio);
  j["baseline_ratio"] = number(res.baseline_ratio);
  j["best_params"] = std::vector<double>(res.best_params.data(), res.best_params.data() + res.best_params.size());
  nlohmann::json trace = nlohmann::json::array();
  for (double v : res.trace) trace.push_back(number(v));
  j["trace"] = trace;
  write_text(opts.out / "extremize_trace.json", j.dump(2) + "\n");
  say(opts, "best ratio " + format_double(res.best_ratio) + " (baseline " + format_double(res.baseline_ratio) + ") after " +
                std::to_string(res.evaluations) + " evaluations");
  return any_failure(rows) ? exit_fail : exit_ok;
}

int run_plot(const CommandOptions& opts) {
  if (!opts.input) throw std::runtime_error("plot: --input REPORT.csv is required");
  if (!std::filesystem::exists(*opts.input)) throw std::runtime_error("input file '" + opts.input->string() + "' not found");
  for (const std::filesystem::path& p : plot_report(*opts.input, opts.out)) say(opts, p.string());
  return exit_ok;
}

}  // namespace mazya::app
