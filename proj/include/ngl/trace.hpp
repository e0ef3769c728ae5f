#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ngl/numkit.hpp"

namespace ngl {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TraceRow {
  std::int64_t k = 0;
  double f_gap = kNaN;            // f(x^k) - f*
  double grad_norm = kNaN;        // |grad f(x^k)|
  double noisy_grad_norm = kNaN;  // |g~| used at step k
  std::int64_t inner_loops = 0;   // rejected trial steps (adaptive only)
  double alpha_hat = kNaN;        // adaptive only
  double L_hat = kNaN;            // adaptive only
};

enum class TerminalReason {
  steps_exhausted,
  stopping_rule,
  envelope_violation,
  target_reached,
  floor_reached,
};

std::string to_string(TerminalReason reason);

struct RunTrace {
  std::vector<TraceRow> rows;
  TerminalReason reason = TerminalReason::steps_exhausted;
  Vector final_point;
  double final_f_gap = kNaN;
  std::int64_t iterations = 0;
  std::int64_t inner_loop_total = 0;
  // Set when the solver was configured with a smaller alpha than the oracle
  // declares, or a driver had to clip a parameter.
  bool hypothesis_warning = false;
  std::string warning;
  // Iteration index at which each restart stage ended.
  std::vector<std::int64_t> stage_ends;
  // Largest |g~ - grad| / |grad| seen while a stopping rule was monitored.
  double max_relative_noise = 0.0;
};

}  // namespace ngl
