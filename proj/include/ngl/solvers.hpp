#pragma once

#include <cstdint>
#include <limits>
#include <optional>

#include "ngl/errors.hpp"
#include "ngl/oracles.hpp"
#include "ngl/trace.hpp"

namespace ngl {

// Raised by a run that cannot continue; carries the trace up to the last
// finite state.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, RunTrace trace)
      : Error(what), trace_(std::move(trace)) {}
  const RunTrace& trace() const { return trace_; }

 private:
  RunTrace trace_;
};

class DivergedError : public SolverError {
 public:
  using SolverError::SolverError;
};

// The adaptive inner loop hit its per-step cap.
class StallError : public SolverError {
 public:
  using SolverError::SolverError;
};

struct RunOptions {
  // Starting point; zero when absent.
  std::optional<Vector> x0;
  // Record every stride-th row (the last row is always recorded).
  std::int64_t record_stride = 1;
  // Stop as soon as f(x^k) - f* <= target_gap.
  double target_gap = -std::numeric_limits<double>::infinity();
  // Index of the first oracle query; later queries are numbered consecutively.
  std::uint64_t first_query = 0;
  // Problem on which rows are measured; the oracle's problem when null. Used
  // to report base-problem gaps while optimizing a regularized surrogate.
  const Problem* measure = nullptr;
};

const Problem& measured_problem(const GradientOracle& oracle, const RunOptions& opts);

struct GDConfig {
  std::int64_t steps = 0;
  double alpha = 0.0;
  double L = 1.0;
  // Multiplies the theoretical step; 1 in normal use.
  double step_scale = 1.0;
};

// ((1 - alpha) / (1 + alpha))^{3/2} / (4 L).
double gd_step_size(double alpha, double L);

class GdStepper {
 public:
  GdStepper(const GradientOracle& oracle, double h, Vector x0);

  const Vector& x() const { return x_; }
  // Queries g~(x), moves x <- x - h g~ and returns the estimate used.
  const Vector& step(std::uint64_t query);

 private:
  const GradientOracle& oracle_;
  double h_;
  Vector x_;
  Vector g_;
};

RunTrace gd_run(const GradientOracle& oracle, const GDConfig& cfg, const RunOptions& opts = {});

// Per-step descent inequality
//   f(x^{k+1}) <= f(x^k) - (1-a)^3 / ((1+a) 16 L) |grad f(x^k)|^2 + 3 delta^2 / (16 L (1+a)^2)
// at every recorded consecutive pair, with slack 1e-9 max(1, |f(x^k)|).
bool gd_theoretical_descent_check(const RunTrace& trace, const Problem& p, const GDConfig& cfg,
                                  double delta);

struct ReAgmParameters {
  double h = 0.0;
  double L_hat = 0.0;
  double gamma_star = 0.0;
  double s = 0.0;
  double m = 0.0;
  double q = 0.0;
  double omega = 0.0;
};

ReAgmParameters re_agm_calculate_parameters(double mu, double L, double alpha);

struct ReAgmConfig {
  std::int64_t steps = 0;
  double mu = 1.0;
  double L = 1.0;
  double alpha = 0.0;
  double step_scale = 1.0;
};

class ReAgmStepper {
 public:
  ReAgmStepper(const GradientOracle& oracle, const ReAgmParameters& params, double mu, Vector x0,
               double step_scale = 1.0);

  const Vector& x() const { return x_; }
  const Vector& u() const { return u_; }
  // y^k = (omega u^k + x^k) / (1 + omega) for the current state.
  Vector probe_y() const;
  // One iteration; queries g~(y^k) and returns it.
  const Vector& step(std::uint64_t query);
  // The y^k used by the most recent step.
  const Vector& last_y() const { return y_; }

 private:
  const GradientOracle& oracle_;
  ReAgmParameters params_;
  double mu_;
  double h_;
  Vector x_;
  Vector u_;
  Vector y_;
  Vector g_;
};

// Rows record x^k; noisy_grad_norm is |g~(y^k)|, and the final row's value
// comes from one extra query at x^N.
RunTrace re_agm_run(const GradientOracle& oracle, const ReAgmConfig& cfg,
                    const RunOptions& opts = {});

struct AdaptiveGDConfig {
  std::int64_t steps = 0;
  double L0 = 1.0;
  double delta = 0.0;
  bool adapt_L = false;
};

inline constexpr int kAdaptiveInnerCap = 64;

struct AdaptiveCoefficients {
  double alpha_hat;
  double L_hat;
  double h;
  double theta;
};

// alpha_hat = 1 - 2^-t, L_hat = L0 2^t when adapt_L else L0.
AdaptiveCoefficients adaptive_coefficients(int t, double L0, bool adapt_L);

// inner_loops counts rejected trial steps, i.e. executions of the while body.
RunTrace adaptive_gd_run(const GradientOracle& oracle, const AdaptiveGDConfig& cfg,
                         const RunOptions& opts = {});

}  // namespace ngl
