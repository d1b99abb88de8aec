#include "mazya/app/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace mazya::app {

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"kernel", {"name", "d", "alpha", "lipschitz"}},
      {"phi", {"family", "p", "a11", "a12", "a22", "direction"}},
      {"grid", {"half_width", "cells_per_axis"}},
      {"bands", {"lo", "hi", "lo_min", "far_field_factor", "method", "max_cells"}},
      {"quadrature", {"scheme", "nodes", "counts", "samples", "seed"}},
      {"suite", {"statements", "widths", "scales", "levels", "separation", "telescope_depth", "increment_eps",
                 "aux_samples", "seed"}},
      {"family", {"bumps", "seed", "restarts", "budget"}},
      {"probe", {"widths", "separation", "half_width", "cells_per_width"}},
      {"output", {"dir"}},
      {"tolerances", {"cancellation", "growth_factor"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

class Reader {
 public:
  explicit Reader(const std::map<std::string, std::string>& e) : entries_(e) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  std::string str(const std::string& key, const std::string& def) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? def : it->second;
  }

  template <typename T>
  T number(const std::string& key, T def) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return def;
    return parse<T>(key, it->second);
  }

  template <typename T>
  std::vector<T> list(const std::string& key, const std::vector<T>& def) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return def;
    std::vector<T> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      out.push_back(parse<T>(key, item));
    }
    return out;
  }

  std::vector<std::string> words(const std::string& key, const std::vector<std::string>& def) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return def;
    std::vector<std::string> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  template <typename T>
  static T parse(const std::string& key, const std::string& text) {
    T v{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    std::from_chars_result res{};
    if constexpr (std::is_floating_point_v<T>) {
      // from_chars for doubles is incomplete in older libstdc++
      char* end = nullptr;
      errno = 0;
      const std::string copy(text);
      v = static_cast<T>(std::strtod(copy.c_str(), &end));
      if (copy.empty() || end != copy.c_str() + copy.size() || errno == ERANGE)
        throw ConfigError("invalid value for '" + key + "': '" + text + "'");
      return v;
    } else {
      res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last) throw ConfigError("invalid value for '" + key + "': '" + text + "'");
      return v;
    }
  }

 private:
  const std::map<std::string, std::string>& entries_;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::vector<std::string> default_statements() {
  return {statement::main_ratio,   statement::first_lemma, statement::second_lemma,   statement::main2_partial,
          statement::remainder_partial, statement::median_bound, statement::local_main2, "aux",
          statement::telescope,    statement::energy_increment};
}

std::string canonical_text(const std::map<std::string, std::string>& entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hex_digest(const std::map<std::string, std::string>& entries) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_text(entries))));
  return buf;
}

}  // namespace

RunConfig parse_config(const std::string& raw) {
  // '#' comment lines are accepted alongside the ';' comments of the INI parser
  std::stringstream cleaned;
  {
    std::stringstream in(raw);
    std::string line;
    while (std::getline(in, line)) {
      const std::string t = trim(line);
      cleaned << (t.rfind('#', 0) == 0 ? std::string() : line) << "\n";
    }
  }
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(cleaned, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' must be inside a section");
    const auto ks = known_keys().find(section);
    if (ks == known_keys().end()) throw ConfigError("unknown section '" + section + "'");
    for (const auto& [key, value] : body) {
      if (!value.empty()) throw ConfigError("malformed key '" + section + "." + key + "'");
      if (!ks->second.count(key)) throw ConfigError("unknown key '" + section + "." + key + "'");
      cfg.entries[section + "." + key] = trim(value.data());
    }
  }
  const Reader r(cfg.entries);

  // kernel
  const std::string kname = r.str("kernel.name", "sign");
  try {
    if (kname == "sign") {
      const int d = r.number<int>("kernel.d", 1);
      if (d != 1) throw ConfigError("invalid value for 'kernel.d': the sign kernel lives in d = 1");
      cfg.kernel = KernelSpec::sign(r.number<double>("kernel.alpha", 0.5));
    } else if (kname == "identity") {
      const int d = r.number<int>("kernel.d", 2);
      cfg.kernel = KernelSpec::identity(d, r.number<double>("kernel.alpha", 0.5 * d));
    } else {
      throw ConfigError("invalid value for 'kernel.name': unknown kernel '" + kname + "'");
    }
    if (r.has("kernel.lipschitz")) cfg.kernel.lipschitz_bound = r.number<double>("kernel.lipschitz", 1.0);
    cfg.kernel.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid value for 'kernel.alpha': ") + e.what());
  }
  const int d = cfg.kernel.d;
  const double p = cfg.kernel.p();
  cfg.kernel_id = kname + "_d" + std::to_string(d) + "_a" + num(cfg.kernel.alpha);

  // phi
  if (r.has("phi.p")) {
    const double pp = r.number<double>("phi.p", p);
    if (std::abs(pp - p) > 1e-12 * std::max(1.0, p))
      throw ConfigError("invalid value for 'phi.p': " + num(pp) + " differs from d/(d-alpha) = " + num(p));
  }
  const std::string family = r.str("phi.family", cfg.kernel.ell == 1 ? "signed_power" : "quadratic_form");
  try {
    if (family == "signed_power") {
      if (cfg.kernel.ell != 1) throw ConfigError("invalid value for 'phi.family': signed_power needs a scalar kernel");
      cfg.phi = PhiSpec::signed_power(p);
      cfg.phi_id = "signed_power_p" + num(p);
    } else if (family == "abs_power") {
      cfg.phi = PhiSpec::abs_power(cfg.kernel.ell, p);
      cfg.phi_id = "abs_power_p" + num(p);
    } else if (family == "quadratic_form") {
      if (cfg.kernel.ell != 2 || std::abs(p - 2.0) > 1e-12)
        throw ConfigError("invalid value for 'phi.family': quadratic_form needs ell = 2 and p = 2");
      const double a11 = r.number<double>("phi.a11", 1.0), a12 = r.number<double>("phi.a12", 0.0),
                   a22 = r.number<double>("phi.a22", -1.0);
      cfg.phi = PhiSpec::quadratic_form(a11, a12, a22);
      cfg.phi_id = "quadratic_" + num(a11) + "_" + num(a12) + "_" + num(a22);
    } else if (family == "norm_power_signed") {
      std::vector<double> u = r.list<double>("phi.direction", {});
      if (u.empty()) {
        u.assign(static_cast<std::size_t>(cfg.kernel.ell), 0.0);
        u[0] = 1.0;
      }
      if (static_cast<int>(u.size()) != cfg.kernel.ell) throw ConfigError("invalid value for 'phi.direction': wrong length");
      Vector v = Eigen::Map<Vector>(u.data(), static_cast<Index>(u.size()));
      if (!(v.norm() > 0.0)) throw ConfigError("invalid value for 'phi.direction': zero vector");
      cfg.phi = PhiSpec::norm_power_signed(v / v.norm(), p);
      cfg.phi_id = "norm_power_signed_p" + num(p);
    } else {
      throw ConfigError("invalid value for 'phi.family': unknown family '" + family + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid value in [phi]: ") + e.what());
  }

  // grid
  const Index default_cells = d == 1 ? 1024 : d == 2 ? 256 : d == 3 ? 64 : 16;
  cfg.grid = GridSpec{d, r.number<double>("grid.half_width", 1.0), r.number<Index>("grid.cells_per_axis", default_cells)};
  try {
    cfg.grid.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid value in [grid]: ") + e.what());
  }

  // bands
  const std::string lo = r.str("bands.lo", "-inf");
  if (lo != "-inf") cfg.band_lo = Reader::parse<int>("bands.lo", lo);
  const std::string hi = r.str("bands.hi", "auto");
  if (hi != "auto") cfg.verify.hi = Reader::parse<int>("bands.hi", hi);
  cfg.verify.convolve.lo_min = r.number<int>("bands.lo_min", -20);
  cfg.verify.convolve.far_field_factor = r.number<double>("bands.far_field_factor", 3.0);
  if (!(cfg.verify.convolve.far_field_factor > 0.0)) throw ConfigError("invalid value for 'bands.far_field_factor'");
  cfg.verify.convolve.max_cells = r.number<Index>("bands.max_cells", Index{1} << 25);
  const std::string method = r.str("bands.method", "fast");
  if (method == "fast")
    cfg.verify.method = ConvolveMethod::fast;
  else if (method == "direct")
    cfg.verify.method = ConvolveMethod::direct;
  else
    throw ConfigError("invalid value for 'bands.method': '" + method + "'");

  // quadrature
  const std::string scheme = r.str("quadrature.scheme", "default");
  try {
    if (scheme == "default")
      cfg.quadrature = SphereQuadrature::default_for(d);
    else if (scheme == "two_point" && d == 1)
      cfg.quadrature = SphereQuadrature::two_point();
    else if (scheme == "uniform_circle" && d == 2)
      cfg.quadrature = SphereQuadrature::uniform_circle(r.number<int>("quadrature.nodes", 256));
    else if (scheme == "product_angles" && d >= 3) {
      std::vector<int> counts = r.list<int>("quadrature.counts", {});
      if (counts.empty()) {
        counts.assign(static_cast<std::size_t>(d - 1), 16);
        counts[0] = 32;
      }
      cfg.quadrature = SphereQuadrature::product_angles(d, counts);
    } else if (scheme == "monte_carlo" && d >= 2)
      cfg.quadrature = SphereQuadrature::monte_carlo(d, r.number<int>("quadrature.samples", 1 << 16),
                                                     r.number<std::uint64_t>("quadrature.seed", 1));
    else
      throw ConfigError("invalid value for 'quadrature.scheme': '" + scheme + "' in d = " + std::to_string(d));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid value in [quadrature]: ") + e.what());
  }

  cfg.cancellation_tol = r.number<double>("tolerances.cancellation", 1e-8);
  cfg.growth_factor = r.number<double>("tolerances.growth_factor", 1.25);

  // suite
  cfg.statements = r.words("suite.statements", default_statements());
  const std::vector<std::string> defaults = default_statements();
  std::set<std::string> valid(defaults.begin(), defaults.end());
  for (const char* s : {statement::aux_k1, statement::aux_k2, statement::aux_k3, statement::aux_phi1}) valid.insert(s);
  for (const std::string& s : cfg.statements)
    if (!valid.count(s)) throw ConfigError("invalid value for 'suite.statements': unknown statement '" + s + "'");
  cfg.width_exponents = r.list<int>("suite.widths", {3, 4, 5});
  cfg.scales = r.list<double>("suite.scales", {1.0, 2.0});
  int e = 0;
  for (double s : cfg.scales)
    if (!(s > 0.0) || std::frexp(s, &e) != 0.5)
      throw ConfigError("invalid value for 'suite.scales': scales must be powers of two");
  cfg.levels = r.list<int>("suite.levels", {0, 1, 2});
  cfg.separation = r.number<double>("suite.separation", 0.5);
  cfg.telescope_depth = r.number<int>("suite.telescope_depth", 6);
  cfg.increment_eps = r.number<double>("suite.increment_eps", 0.49);
  cfg.aux.random_samples = r.number<int>("suite.aux_samples", 10000);
  cfg.seed = r.number<std::uint64_t>("suite.seed", 1);
  cfg.aux.seed = cfg.seed;

  // probe
  cfg.probe.widths.clear();
  for (int k : r.list<int>("probe.widths", {3, 4, 5, 6, 7})) cfg.probe.widths.push_back(std::ldexp(1.0, -k));
  cfg.probe.separation = r.number<double>("probe.separation", 0.5);
  cfg.probe.half_width = r.number<double>("probe.half_width", 1.0);
  cfg.probe.cells_per_width = r.number<Index>("probe.cells_per_width", 64);
  cfg.probe.growth_factor = cfg.growth_factor;

  // family
  cfg.family.bumps = r.number<int>("family.bumps", 2);
  cfg.family.seed = r.number<std::uint64_t>("family.seed", cfg.seed);
  cfg.family.restarts = r.number<int>("family.restarts", 8);
  cfg.family.grid = cfg.grid;
  cfg.budget = r.number<long long>("family.budget", 500);

  cfg.output_dir = r.str("output.dir", ".");
  cfg.digest = hex_digest(cfg.entries);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.aux.seed = seed;
  cfg.family.seed = seed;
  if (cfg.quadrature.scheme == QuadratureScheme::monte_carlo)
    cfg.quadrature = SphereQuadrature::monte_carlo(cfg.quadrature.d, static_cast<int>(cfg.quadrature.size()), seed);
  cfg.entries["cli.seed"] = std::to_string(seed);
  cfg.digest = hex_digest(cfg.entries);
}

}  // namespace mazya::app
