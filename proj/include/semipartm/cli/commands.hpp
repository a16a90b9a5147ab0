#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semipartm/cli/persist.hpp"
#include "semipartm/error.hpp"
#include "semipartm/evaluate.hpp"

namespace semipartm::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

int exit_code(ErrorClass c);

// Entry point. `args` excludes the program name.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

// Simulation grid plus evaluation settings.
struct SimEvalSpec {
  std::vector<std::size_t> docs{150};
  std::vector<std::size_t> words{500};
  std::vector<double> sparsity{0.70};
  std::vector<double> misspec{1.0};
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::size_t reps = 10;
  std::uint64_t seed = 0;
  double holdout_fraction = 0.25;
  EvalOptions eval;
  unsigned jobs = 1;
  bool plan_only = false;
  std::filesystem::path out;
};

struct ScenarioCell {
  std::size_t docs = 0;
  std::size_t words = 0;
  double sparsity = 0.0;
  double misspec = 0.0;
};

// Cartesian product of the levels, docs varying slowest.
std::vector<ScenarioCell> enumerate_cells(const SimEvalSpec& spec);

struct SimEvalOutcome {
  std::vector<EvalRow> rows;  // successful rows in (cell, replicate, method) order
  Json failures = Json::array();
  std::size_t n_cells = 0;
};

// Runs every (cell, replicate, method), then writes manifest.json, rows.tsv and
// the report tables into spec.out. Failed jobs are listed in the manifest and
// in failures.json while the successful rows are still written. Throws
// Errc::EmptyInput when there is nothing to run.
SimEvalOutcome cmd_simulate_eval(const SimEvalSpec& spec, const Json& config = Json::object());

}  // namespace semipartm::cli
