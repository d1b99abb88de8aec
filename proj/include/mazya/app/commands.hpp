#pragma once

#include "mazya/app/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mazya::app {

struct CommandOptions {
  std::filesystem::path out = ".";
  int threads = 1;
  bool force = false;
  std::optional<std::filesystem::path> input;
  std::ostream* log = nullptr;
};

/// Exit codes shared by every subcommand.
enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_fail = 2 };

int run_check_cancellation(const RunConfig& cfg, const CommandOptions& opts);
int run_convolve(const RunConfig& cfg, const CommandOptions& opts);
int run_verify(const RunConfig& cfg, const CommandOptions& opts);
int run_probe(const RunConfig& cfg, const CommandOptions& opts);
int run_extremize(const RunConfig& cfg, const CommandOptions& opts);
int run_plot(const CommandOptions& opts);

/// Test functions of the verify suite, keyed by f_id.
struct SuiteFunction {
  std::string id;
  int width_exponent = 0;
  double scale = 1.0;
  GridFunction f;
};
std::vector<SuiteFunction> suite_functions(const RunConfig& cfg);

/// Every row of the configured suite, sorted; amplitude multiplies every
/// test function (1 in normal runs).
std::vector<InequalityReport> verify_suite(const RunConfig& cfg, int threads, double amplitude = 1.0);

std::vector<InequalityReport> cancellation_rows(const RunConfig& cfg, const CancellationResult& c);

}  // namespace mazya::app
