#include "ngl/solvers.hpp"

#include <cmath>

#include "ngl/bounds.hpp"

namespace ngl {

std::string to_string(TerminalReason reason) {
  switch (reason) {
    case TerminalReason::steps_exhausted: return "steps_exhausted";
    case TerminalReason::stopping_rule: return "stopping_rule";
    case TerminalReason::envelope_violation: return "envelope_violation";
    case TerminalReason::target_reached: return "target_reached";
    case TerminalReason::floor_reached: return "floor_reached";
  }
  return "unknown";
}

namespace {

Vector start_point(const GradientOracle& oracle, const RunOptions& opts) {
  const std::size_t n = oracle.problem().dim();
  if (!opts.x0) return Vector::Zero(static_cast<Eigen::Index>(n));
  if (static_cast<std::size_t>(opts.x0->size()) != n) {
    throw DimensionMismatch(n, static_cast<std::size_t>(opts.x0->size()));
  }
  require_finite(*opts.x0, "starting point");
  return *opts.x0;
}

}  // namespace

const Problem& measured_problem(const GradientOracle& oracle, const RunOptions& opts) {
  if (!opts.measure) return oracle.problem();
  if (opts.measure->dim() != oracle.problem().dim()) {
    throw DimensionMismatch(oracle.problem().dim(), opts.measure->dim());
  }
  return *opts.measure;
}

namespace {

void check_options(const RunOptions& opts, std::int64_t steps) {
  if (steps < 0) throw InvalidInput("number of steps must be non-negative");
  if (opts.record_stride < 1) throw InvalidInput("record stride must be at least 1");
}

// Appends the row for x^k when it falls on the stride, or always when final.
// Returns true when the target gap is reached.
struct Recorder {
  const Problem& p;
  const RunOptions& opts;
  RunTrace& trace;

  bool record(std::int64_t k, const Vector& x, double noisy_norm, bool final_row,
              TraceRow extra = {}) {
    const double gap = p.gap(x);
    if (final_row || k % opts.record_stride == 0 || gap <= opts.target_gap) {
      extra.k = k;
      extra.f_gap = gap;
      extra.grad_norm = p.gradient(x).norm();
      extra.noisy_grad_norm = noisy_norm;
      trace.rows.push_back(extra);
    }
    return gap <= opts.target_gap;
  }

  void finish(std::int64_t k, const Vector& x) {
    trace.iterations = k;
    trace.final_point = x;
    trace.final_f_gap = p.gap(x);
  }
};

void flag_alpha(RunTrace& trace, double configured, const GradientOracle& oracle) {
  if (configured < oracle.declared_alpha()) {
    trace.hypothesis_warning = true;
    trace.warning = "solver alpha is below the oracle's declared relative noise";
  }
}

}  // namespace

double gd_step_size(double alpha, double L) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in [0, 1)");
  if (!(L > 0.0)) throw InvalidInput("L must be positive");
  return std::pow((1.0 - alpha) / (1.0 + alpha), 1.5) / (4.0 * L);
}

GdStepper::GdStepper(const GradientOracle& oracle, double h, Vector x0)
    : oracle_(oracle), h_(h), x_(std::move(x0)) {}

const Vector& GdStepper::step(std::uint64_t query) {
  g_ = oracle_.estimate(x_, query);
  x_ -= h_ * g_;
  return g_;
}

RunTrace gd_run(const GradientOracle& oracle, const GDConfig& cfg, const RunOptions& opts) {
  check_options(opts, cfg.steps);
  const Problem& p = measured_problem(oracle, opts);
  GdStepper stepper(oracle, gd_step_size(cfg.alpha, cfg.L) * cfg.step_scale,
                    start_point(oracle, opts));
  RunTrace trace;
  flag_alpha(trace, cfg.alpha, oracle);
  Recorder rec{p, opts, trace};
  std::uint64_t query = opts.first_query;
  for (std::int64_t k = 0; k < cfg.steps; ++k) {
    Vector x_prev = stepper.x();
    const Vector& g = stepper.step(query++);
    if (rec.record(k, x_prev, g.norm(), false)) {
      trace.reason = TerminalReason::target_reached;
      rec.finish(k, x_prev);
      return trace;
    }
    if (!all_finite(stepper.x())) {
      rec.finish(k, x_prev);
      throw DivergedError("gradient descent diverged at step " + std::to_string(k + 1),
                          std::move(trace));
    }
  }
  const Vector& x = stepper.x();
  rec.record(cfg.steps, x, oracle.estimate(x, query).norm(), true);
  if (p.gap(x) <= opts.target_gap) trace.reason = TerminalReason::target_reached;
  rec.finish(cfg.steps, x);
  return trace;
}

bool gd_theoretical_descent_check(const RunTrace& trace, const Problem& p, const GDConfig& cfg,
                                  double delta) {
  const double a = cfg.alpha;
  const double decrease = std::pow(1.0 - a, 3) / ((1.0 + a) * 16.0 * cfg.L);
  const double noise = 3.0 * delta * delta / (16.0 * cfg.L * (1.0 + a) * (1.0 + a));
  for (std::size_t i = 0; i + 1 < trace.rows.size(); ++i) {
    const TraceRow& cur = trace.rows[i];
    const TraceRow& next = trace.rows[i + 1];
    if (next.k != cur.k + 1) continue;
    const double f_cur = cur.f_gap + p.f_star();
    const double slack = 1e-9 * std::max(1.0, std::abs(f_cur));
    const double allowed = cur.f_gap - decrease * cur.grad_norm * cur.grad_norm + noise;
    if (next.f_gap > allowed + slack) return false;
  }
  return true;
}

ReAgmParameters re_agm_calculate_parameters(double mu, double L, double alpha) {
  if (!(mu > 0.0)) throw InvalidInput("RE-AGM requires mu > 0");
  if (!(L >= mu)) throw InvalidInput("RE-AGM requires mu <= L");
  if (!(alpha >= 0.0)) throw InvalidInput("RE-AGM requires alpha >= 0");
  if (!(alpha <= 1.0 / 3.0)) throw HypothesisViolation("hypothesis violated: alpha <= 1/3");
  ReAgmParameters r;
  r.h = gd_step_size(alpha, L);
  r.L_hat = 8.0 * (1.0 + alpha) / std::pow(1.0 - alpha, 3) * L;
  r.gamma_star = gamma_star(mu, L, alpha);
  const double shrink = 0.25 * std::pow(mu / (2.0 * L), r.gamma_star);
  r.s = (1.0 + shrink) * (1.0 + alpha) * (1.0 + alpha) + 2.0 * alpha * alpha;
  r.m = (1.0 - shrink) * (1.0 - alpha) * (1.0 - alpha) - 2.0 * alpha * alpha;
  r.q = mu / (2.0 * r.L_hat);
  if (!(r.m > 0.0)) throw InvalidInput("RE-AGM parameter m is not positive");
  // Largest root of m w^2 + (s - m) w - q = 0 in cancellation-free form.
  const double b = r.s - r.m;
  r.omega = 2.0 * r.q / (b + std::sqrt(b * b + 4.0 * r.m * r.q));
  return r;
}

ReAgmStepper::ReAgmStepper(const GradientOracle& oracle, const ReAgmParameters& params,
                           double mu, Vector x0, double step_scale)
    : oracle_(oracle),
      params_(params),
      mu_(mu),
      h_(params.h * step_scale),
      x_(x0),
      u_(std::move(x0)) {}

Vector ReAgmStepper::probe_y() const {
  return (params_.omega * u_ + x_) / (1.0 + params_.omega);
}

const Vector& ReAgmStepper::step(std::uint64_t query) {
  const double w = params_.omega;
  y_ = probe_y();
  g_ = oracle_.estimate(y_, query);
  u_ = (1.0 - w) * u_ + w * y_ - (2.0 * w / mu_) * g_;
  x_ = y_ - h_ * g_;
  return g_;
}

RunTrace re_agm_run(const GradientOracle& oracle, const ReAgmConfig& cfg,
                    const RunOptions& opts) {
  check_options(opts, cfg.steps);
  const Problem& p = measured_problem(oracle, opts);
  const ReAgmParameters params = re_agm_calculate_parameters(cfg.mu, cfg.L, cfg.alpha);
  ReAgmStepper stepper(oracle, params, cfg.mu, start_point(oracle, opts), cfg.step_scale);
  RunTrace trace;
  flag_alpha(trace, cfg.alpha, oracle);
  Recorder rec{p, opts, trace};
  std::uint64_t query = opts.first_query;
  for (std::int64_t k = 0; k < cfg.steps; ++k) {
    Vector x_prev = stepper.x();
    const Vector& g = stepper.step(query++);
    if (rec.record(k, x_prev, g.norm(), false)) {
      trace.reason = TerminalReason::target_reached;
      rec.finish(k, x_prev);
      return trace;
    }
    if (!all_finite(stepper.x()) || !all_finite(stepper.u())) {
      rec.finish(k, x_prev);
      throw DivergedError("RE-AGM diverged at step " + std::to_string(k + 1), std::move(trace));
    }
  }
  const Vector& x = stepper.x();
  rec.record(cfg.steps, x, oracle.estimate(x, query).norm(), true);
  if (p.gap(x) <= opts.target_gap) trace.reason = TerminalReason::target_reached;
  rec.finish(cfg.steps, x);
  return trace;
}

AdaptiveCoefficients adaptive_coefficients(int t, double L0, bool adapt_L) {
  AdaptiveCoefficients c;
  const double tail = std::ldexp(1.0, -t);  // 1 - alpha_hat
  c.alpha_hat = 1.0 - tail;
  c.L_hat = adapt_L ? std::ldexp(L0, t) : L0;
  const double ratio = tail / (2.0 - tail);  // (1 - a) / (1 + a)
  c.h = std::sqrt(ratio) / (4.0 * c.L_hat);
  c.theta = ratio / (32.0 * c.L_hat);
  return c;
}

RunTrace adaptive_gd_run(const GradientOracle& oracle, const AdaptiveGDConfig& cfg,
                         const RunOptions& opts) {
  check_options(opts, cfg.steps);
  if (!(cfg.L0 > 0.0)) throw InvalidInput("adaptive descent requires L0 > 0");
  if (!(cfg.delta >= 0.0)) throw InvalidInput("adaptive descent requires delta >= 0");
  const Problem& p = measured_problem(oracle, opts);
  const Problem& target = oracle.problem();
  Vector x = start_point(oracle, opts);
  RunTrace trace;
  Recorder rec{p, opts, trace};
  std::uint64_t query = opts.first_query;
  int J = 1;
  const double d2 = cfg.delta * cfg.delta;
  for (std::int64_t k = 0; k < cfg.steps; ++k) {
    // One estimate per outer step, reused by every trial.
    const Vector g = oracle.estimate(x, query++);
    const double g2 = g.squaredNorm();
    const double fx = target.value(x);
    int rejected = 0;
    AdaptiveCoefficients c = adaptive_coefficients(J, cfg.L0, cfg.adapt_L);
    Vector y = x - c.h * g;
    while (target.value(y) > fx - c.theta * g2 + 3.0 * d2 / (4.0 * (1.0 + c.alpha_hat) *
                                                        (1.0 + c.alpha_hat) * c.L_hat)) {
      if (++rejected > kAdaptiveInnerCap) {
        rec.finish(k, x);
        throw StallError("adaptive inner loop exceeded " + std::to_string(kAdaptiveInnerCap) +
                             " trials at step " + std::to_string(k),
                         std::move(trace));
      }
      ++J;
      c = adaptive_coefficients(J, cfg.L0, cfg.adapt_L);
      y = x - c.h * g;
    }
    trace.inner_loop_total += rejected;
    TraceRow extra;
    extra.inner_loops = rejected;
    extra.alpha_hat = c.alpha_hat;
    extra.L_hat = c.L_hat;
    if (rec.record(k, x, std::sqrt(g2), false, extra)) {
      trace.reason = TerminalReason::target_reached;
      rec.finish(k, x);
      return trace;
    }
    if (!all_finite(y)) {
      rec.finish(k, x);
      throw DivergedError("adaptive descent diverged at step " + std::to_string(k + 1),
                          std::move(trace));
    }
    x = std::move(y);
    J = std::max(1, J - 1);
  }
  rec.record(cfg.steps, x, oracle.estimate(x, query).norm(), true);
  if (p.gap(x) <= opts.target_gap) trace.reason = TerminalReason::target_reached;
  rec.finish(cfg.steps, x);
  return trace;
}

}  // namespace ngl
