#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ngl/bounds.hpp"
#include "ngl/harness/config.hpp"
#include "ngl/trace.hpp"

namespace ngl::harness {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitEnvelope = 2,
  kExitHypothesis = 3,
};

// Built objects for one experiment.
struct Setup {
  ProblemPtr problem;
  OraclePtr oracle;
  Vector x0;
};

Setup build(const ExperimentConfig& cfg);

struct RunSummary {
  std::string name;
  double final_f_gap = kNaN;
  double f0_gap = kNaN;
  std::int64_t iterations = 0;
  std::int64_t inner_loop_total = 0;
  std::int64_t envelope_violations = 0;
  std::string terminal_reason;
  std::string envelope;  // theorem id, empty when no per-row bound applies
  double envelope_floor = kNaN;
  bool hypothesis_warning = false;
  std::string warning;
  std::vector<std::int64_t> stage_ends;
  double max_relative_noise = kNaN;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
};

struct RunResult {
  RunTrace trace;
  // Bound for every trace row; NaN where none applies.
  std::vector<double> bounds;
  RunSummary summary;
};

// Runs the configured experiment and checks every bounded row with slack
// 1e-9 max(1, f0 gap). Driver guarantees (final gap <= epsilon, stopping
// level on a rule exit) are checked on the final row. Throws ConfigError,
// HypothesisViolation and SolverError.
RunResult run_experiment(const ExperimentConfig& cfg);

// Columns k,f_gap,grad_norm,noisy_grad_norm,bound,inner_loops; reals in %.17g.
void write_trace_csv(const std::string& path, const RunResult& result);
void write_summary_json(const std::string& path, const ExperimentConfig& cfg,
                        const RunSummary& summary);

// Loads, runs and writes <out>/trace.csv and <out>/summary.json.
int cli_run(const std::string& config_path, std::ostream& out, std::ostream& err);

// Runs every sweep point (up to jobs at a time) and writes
// <out>/comparison.csv with one row per run.
int cli_sweep(const std::string& config_path, int jobs, std::ostream& out, std::ostream& err);

// Theorem table: N, envelope value, and the budget for epsilon when given.
int cli_bounds(const std::string& theorem, const std::vector<std::string>& assignments,
               std::ostream& out, std::ostream& err);

}  // namespace ngl::harness
