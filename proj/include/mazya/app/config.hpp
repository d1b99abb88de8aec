#pragma once

#include "mazya/extremize.hpp"
#include "mazya/kernel.hpp"
#include "mazya/phi.hpp"
#include "mazya/verify.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mazya::app {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  KernelSpec kernel;
  PhiSpec phi;
  std::string kernel_id;
  std::string phi_id;

  GridSpec grid;
  VerifyOptions verify;
  std::optional<int> band_lo;  // convolve subcommand; empty is -inf

  SphereQuadrature quadrature;
  double cancellation_tol = 1e-8;

  std::vector<std::string> statements;
  std::vector<int> width_exponents;
  std::vector<double> scales;
  std::vector<int> levels;
  double separation = 0.5;
  int telescope_depth = 6;
  double increment_eps = 0.49;
  double growth_factor = 1.25;
  AuxOptions aux;

  ProbeOptions probe;

  FamilySpec family;
  long long budget = 500;

  std::filesystem::path output_dir = ".";
  std::uint64_t seed = 1;

  /// FNV-1a 64 of the canonical sorted key=value text, as 16 hex digits.
  std::string digest;
  /// section.key -> value, as written.
  std::map<std::string, std::string> entries;
};

std::vector<std::string> default_statements();

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Re-seeds every seeded component and folds the override into the digest.
void apply_seed(RunConfig& cfg, std::uint64_t seed);

std::string canonical_text(const std::map<std::string, std::string>& entries);
std::uint64_t fnv1a64(const std::string& text);

}  // namespace mazya::app
