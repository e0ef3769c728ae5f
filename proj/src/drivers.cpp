#include "ngl/drivers.hpp"

#include <algorithm>
#include <cmath>

namespace ngl {

namespace {

// Accelerated gradient method with exact gradients and constant momentum,
// run until the gradient norm stalls at rounding level.
Vector exact_minimizer(const Problem& p, const Vector& start) {
  const double L = p.L();
  const double kappa = L / p.mu();
  const double momentum = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);
  const double tol = 1e-13 * std::max(1.0, p.gradient(start).norm());
  const std::int64_t max_iter =
      static_cast<std::int64_t>(std::min(5.0e7, 200.0 * std::sqrt(kappa) + 1e4));
  Vector x = start;
  Vector x_prev = start;
  Vector best = start;
  double best_norm = p.gradient(start).norm();
  for (std::int64_t it = 1; it <= max_iter; ++it) {
    const Vector y = x + momentum * (x - x_prev);
    x_prev = x;
    x = y - p.gradient(y) / L;
    if (it % 64 == 0) {
      const double gn = p.gradient(x).norm();
      if (gn < best_norm) {
        best_norm = gn;
        best = x;
      }
      if (gn <= tol) break;
    }
  }
  return best;
}

void require_hypothesis(bool ok, const std::string& what) {
  if (!ok) throw HypothesisViolation("hypothesis violated: " + what);
}

Vector center_of(const Problem& p, const RunOptions& opts) {
  if (!opts.x0) return Vector::Zero(static_cast<Eigen::Index>(p.dim()));
  if (static_cast<std::size_t>(opts.x0->size()) != p.dim()) {
    throw DimensionMismatch(p.dim(), static_cast<std::size_t>(opts.x0->size()));
  }
  return *opts.x0;
}

}  // namespace

RegularizedProblem::RegularizedProblem(ProblemPtr base, Vector center, double mu_reg)
    : Problem(base ? base->dim() : 1, mu_reg, (base ? base->L() : 0.0) + mu_reg,
              "regularized(" + (base ? base->name() : std::string()) + ")"),
      base_(std::move(base)),
      center_(std::move(center)),
      mu_reg_(mu_reg) {
  if (!base_) throw InvalidInput("regularize: base problem required");
  if (static_cast<std::size_t>(center_.size()) != base_->dim()) {
    throw DimensionMismatch(base_->dim(), static_cast<std::size_t>(center_.size()));
  }
  require_finite(center_, "regularize: center");
  set_minimizer(exact_minimizer(*this, center_));
}

double RegularizedProblem::R_mu() const { return (x_star() - center_).norm(); }

double RegularizedProblem::value_impl(const Vector& x) const {
  return base_->value(x) + 0.5 * mu_reg_ * (x - center_).squaredNorm();
}

Vector RegularizedProblem::gradient_impl(const Vector& x) const {
  return base_->gradient(x) + mu_reg_ * (x - center_);
}

std::shared_ptr<const RegularizedProblem> regularize(ProblemPtr base, Vector center,
                                                     double mu_reg) {
  if (!(mu_reg > 0.0) || !std::isfinite(mu_reg)) {
    throw InvalidInput("regularize: mu_reg must be positive");
  }
  return std::make_shared<RegularizedProblem>(std::move(base), std::move(center), mu_reg);
}

RegularizedOracle::RegularizedOracle(std::shared_ptr<const RegularizedProblem> problem,
                                     OraclePtr base, double R)
    : GradientOracle(problem), reg_(std::move(problem)), base_(std::move(base)), R_(R) {
  if (!base_) throw InvalidInput("regularized oracle: base oracle required");
  if (&base_->problem() != &reg_->base()) {
    throw InvalidInput("regularized oracle: base oracle must target the base problem");
  }
  if (!(R >= 0.0)) throw InvalidInput("regularized oracle: R must be non-negative");
}

double RegularizedOracle::declared_alpha() const { return 2.0 * base_->declared_alpha(); }

double RegularizedOracle::declared_delta() const {
  return base_->declared_alpha() * reg_->mu_reg() * R_ + base_->declared_delta();
}

Vector RegularizedOracle::estimate_impl(const Vector& x, const Vector&,
                                        std::uint64_t query) const {
  return base_->estimate(x, query) + reg_->mu_reg() * (x - reg_->center());
}

SolverKind parse_solver(const std::string& text) {
  if (text == "gd") return SolverKind::gd;
  if (text == "re_agm") return SolverKind::re_agm;
  if (text == "adaptive_gd") return SolverKind::adaptive_gd;
  throw InvalidInput("unknown solver '" + text + "'");
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::gd: return "gd";
    case SolverKind::re_agm: return "re_agm";
    case SolverKind::adaptive_gd: return "adaptive_gd";
  }
  return "unknown";
}

StoppingRule::StoppingRule(double K_, double delta_, double alpha_)
    : K(K_), delta(delta_), alpha(alpha_) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidInput("stopping rule: alpha must lie in [0, 1)");
  if (!(delta >= 0.0)) throw InvalidInput("stopping rule: delta must be non-negative");
  if (!(K > 1.0 / (1.0 - alpha))) throw InvalidInput("stopping rule: K must exceed 1/(1-alpha)");
}

double StoppingRule::threshold() const { return ((1.0 + alpha) * K + 1.0) * delta; }

double StoppingRule::level(double mu) const { return stopping_level(mu, alpha, delta, K); }

RunTrace solve_convex_gd(const OraclePtr& oracle, double epsilon, double R,
                         const RunOptions& opts) {
  if (!oracle) throw InvalidInput("solve_convex_gd: oracle required");
  const Problem& base = oracle->problem();
  const double alpha = oracle->declared_alpha();
  require_hypothesis(oracle->declared_delta() == 0.0, "relative-only noise (delta = 0)");
  require_hypothesis(alpha < 0.5, "alpha < 1/2");
  EnvelopeConstants c;
  c.L = base.L();
  c.R = R;
  c.alpha = alpha;
  const std::int64_t budget = iteration_budget(TheoremId::GD_REG, c, epsilon);
  const double mu = gd_regularization_mu(alpha, epsilon, R);
  Vector center = center_of(base, opts);
  auto reg = regularize(oracle->problem_ptr(), center, mu);
  RegularizedOracle reg_oracle(reg, oracle, R);
  RunOptions run_opts = opts;
  run_opts.x0 = center;
  run_opts.measure = &base;
  return gd_run(reg_oracle, GDConfig{budget, 2.0 * alpha, reg->L()}, run_opts);
}

RunTrace solve_convex_re_agm(const OraclePtr& oracle, double epsilon, double beta, double R,
                             const RunOptions& opts) {
  if (!oracle) throw InvalidInput("solve_convex_re_agm: oracle required");
  const Problem& base = oracle->problem();
  const double alpha = oracle->declared_alpha();
  require_hypothesis(oracle->declared_delta() == 0.0, "relative-only noise (delta = 0)");
  EnvelopeConstants c;
  c.L = base.L();
  c.R = R;
  c.alpha = alpha;
  c.beta = beta;
  const std::int64_t budget = iteration_budget(TheoremId::REAGM_REG, c, epsilon);
  const double mu = re_agm_regularization_mu(epsilon, R);
  Vector center = center_of(base, opts);
  auto reg = regularize(oracle->problem_ptr(), center, mu);
  RegularizedOracle reg_oracle(reg, oracle, R);
  double run_alpha = 2.0 * alpha;
  bool clipped = false;
  if (run_alpha > 1.0 / 3.0) {
    run_alpha = 1.0 / 3.0;
    clipped = true;
  }
  RunOptions run_opts = opts;
  run_opts.x0 = center;
  run_opts.measure = &base;
  RunTrace trace =
      re_agm_run(reg_oracle, ReAgmConfig{budget, mu, reg->L(), run_alpha}, run_opts);
  if (clipped) {
    trace.hypothesis_warning = true;
    trace.warning = "regularized relative level 2 alpha exceeds 1/3; RE-AGM ran with 1/3";
  }
  return trace;
}

RunTrace run_with_stopping(SolverKind solver, const GradientOracle& oracle,
                           const StoppingRule& rule, double alpha_hat, std::int64_t n_cap,
                           const RunOptions& opts) {
  const Problem& target = oracle.problem();
  if (!(target.mu() > 0.0)) throw InvalidInput("stopping rule requires mu > 0");
  if (n_cap < 0) throw InvalidInput("stopping rule: step cap must be non-negative");
  if (opts.record_stride < 1) throw InvalidInput("record stride must be at least 1");
  const Problem& p = measured_problem(oracle, opts);
  const double threshold = rule.threshold();
  RunTrace trace;
  if (alpha_hat < oracle.declared_alpha()) {
    trace.hypothesis_warning = true;
    trace.warning = "alpha_hat is below the oracle's declared relative noise";
  }
  std::uint64_t query = opts.first_query;
  Vector x = center_of(target, opts);

  auto track = [&](const Vector& z, const Vector& g) {
    const Vector grad = target.gradient(z);
    const double gn = grad.norm();
    if (gn > 0.0) {
      trace.max_relative_noise = std::max(trace.max_relative_noise, (g - grad).norm() / gn);
    }
  };
  auto record = [&](std::int64_t k, const Vector& z, double noisy, bool force) {
    if (!force && k % opts.record_stride != 0) return;
    TraceRow row;
    row.k = k;
    row.f_gap = p.gap(z);
    row.grad_norm = p.gradient(z).norm();
    row.noisy_grad_norm = noisy;
    trace.rows.push_back(row);
  };
  auto finish = [&](std::int64_t k, const Vector& z, TerminalReason reason) {
    trace.iterations = k;
    trace.final_point = z;
    trace.final_f_gap = p.gap(z);
    trace.reason = reason;
  };
  auto diverged = [&](std::int64_t k) {
    throw DivergedError("run with stopping rule diverged at step " + std::to_string(k + 1),
                        std::move(trace));
  };

  switch (solver) {
    case SolverKind::gd: {
      const double h = gd_step_size(alpha_hat, target.L());
      for (std::int64_t k = 0;; ++k) {
        const Vector g = oracle.estimate(x, query++);
        const double gn = g.norm();
        const bool stop = gn <= threshold;
        record(k, x, gn, stop || k == n_cap);
        if (stop) {
          finish(k, x, TerminalReason::stopping_rule);
          return trace;
        }
        track(x, g);
        if (k == n_cap) break;
        x -= h * g;
        if (!all_finite(x)) diverged(k);
      }
      finish(n_cap, x, TerminalReason::steps_exhausted);
      return trace;
    }
    case SolverKind::re_agm: {
      const ReAgmParameters prm = re_agm_calculate_parameters(target.mu(), target.L(), alpha_hat);
      const double w = prm.omega;
      Vector u = x;
      for (std::int64_t k = 0;; ++k) {
        const Vector gx = oracle.estimate(x, query++);
        const double gxn = gx.norm();
        const bool stop = gxn <= threshold;
        record(k, x, gxn, stop || k == n_cap);
        if (stop) {
          finish(k, x, TerminalReason::stopping_rule);
          return trace;
        }
        track(x, gx);
        if (k == n_cap) break;
        const Vector y = (w * u + x) / (1.0 + w);
        const Vector gy = oracle.estimate(y, query++);
        if (gy.norm() <= threshold) {
          finish(k, y, TerminalReason::stopping_rule);
          return trace;
        }
        track(y, gy);
        u = (1.0 - w) * u + w * y - (2.0 * w / target.mu()) * gy;
        x = y - prm.h * gy;
        if (!all_finite(x) || !all_finite(u)) diverged(k);
      }
      finish(n_cap, x, TerminalReason::steps_exhausted);
      return trace;
    }
    case SolverKind::adaptive_gd:
      break;
  }
  throw InvalidInput("stopping rule supports gd and re_agm only");
}

RunTrace restart_to_convex(SolverKind solver, const GradientOracle& oracle, double epsilon,
                           const RunOptions& opts) {
  const Problem& target = oracle.problem();
  if (!(target.mu() > 0.0)) throw InvalidInput("restarts require a known mu > 0");
  if (!(epsilon > 0.0)) throw InvalidInput("restarts require epsilon > 0");
  if (solver == SolverKind::adaptive_gd) throw InvalidInput("restarts support gd and re_agm only");
  const double alpha = oracle.declared_alpha();
  const double delta = oracle.declared_delta();
  if (solver == SolverKind::re_agm) require_hypothesis(alpha <= 1.0 / 3.0, "alpha <= 1/3");

  Vector x = center_of(target, opts);
  const double gap0 = target.gap(x);
  RunTrace trace;
  trace.final_point = x;
  trace.final_f_gap = measured_problem(oracle, opts).gap(x);
  {
    TraceRow row;
    row.k = 0;
    row.f_gap = trace.final_f_gap;
    row.grad_norm = measured_problem(oracle, opts).gradient(x).norm();
    trace.rows.push_back(row);
  }
  if (gap0 <= epsilon) return trace;
  const int stages = static_cast<int>(std::ceil(std::log2(gap0 / epsilon)));
  std::int64_t offset = 0;
  std::uint64_t query = opts.first_query;
  for (int s = 1; s <= stages; ++s) {
    const double start_bound = gap0 / std::ldexp(1.0, s - 1);
    const double stage_target = gap0 / std::ldexp(1.0, s);
    EnvelopeConstants c;
    c.mu = target.mu();
    c.L = target.L();
    c.alpha = alpha;
    c.delta = delta;
    c.f0_gap = start_bound;
    c.R = std::sqrt(2.0 * start_bound / target.mu());
    const Envelope env =
        envelope(solver == SolverKind::gd ? TheoremId::GD_PL : TheoremId::REAGM, c);
    const auto budget = env.steps_to_reach(stage_target);
    if (!budget) {
      trace.reason = TerminalReason::floor_reached;
      return trace;
    }
    RunOptions stage_opts = opts;
    stage_opts.x0 = x;
    stage_opts.first_query = query;
    stage_opts.target_gap = -std::numeric_limits<double>::infinity();
    RunTrace stage = solver == SolverKind::gd
                         ? gd_run(oracle, GDConfig{*budget, alpha, target.L()}, stage_opts)
                         : re_agm_run(oracle, ReAgmConfig{*budget, target.mu(), target.L(), alpha},
                                      stage_opts);
    query += static_cast<std::uint64_t>(*budget) + 1;
    for (std::size_t i = 1; i < stage.rows.size(); ++i) {
      TraceRow row = stage.rows[i];
      row.k += offset;
      trace.rows.push_back(row);
    }
    offset += stage.iterations;
    x = stage.final_point;
    trace.iterations = offset;
    trace.final_point = x;
    trace.final_f_gap = stage.final_f_gap;
    trace.stage_ends.push_back(offset);
    trace.hypothesis_warning = trace.hypothesis_warning || stage.hypothesis_warning;
    const double reached = target.gap(x);
    if (reached > stage_target * (1.0 + 1e-9)) {
      throw StageFailure("restart stage " + std::to_string(s) + " reached gap " +
                             std::to_string(reached) + " above its target " +
                             std::to_string(stage_target) + " after " +
                             std::to_string(*budget) + " steps",
                         std::move(trace));
    }
  }
  trace.reason = TerminalReason::steps_exhausted;
  return trace;
}

RunTrace combined_reg_stop(const OraclePtr& oracle, double epsilon, double tau, double R,
                           const RunOptions& opts) {
  if (!oracle) throw InvalidInput("combined_reg_stop: oracle required");
  const Problem& base = oracle->problem();
  const double alpha = oracle->declared_alpha();
  require_hypothesis(oracle->declared_delta() == 0.0, "relative-only noise (delta = 0)");
  EnvelopeConstants c;
  c.L = base.L();
  c.R = R;
  c.alpha = alpha;
  c.tau = tau;
  const std::int64_t budget = iteration_budget(TheoremId::COMBINED_REG_STOP, c, epsilon);
  const double mu = combined_regularization_mu(epsilon, R);
  Vector center = center_of(base, opts);
  auto reg = regularize(oracle->problem_ptr(), center, mu);
  auto reg_oracle = std::make_shared<RegularizedOracle>(reg, oracle, R);
  const StoppingRule rule(1.0 / alpha, reg_oracle->declared_delta(), reg_oracle->declared_alpha());
  RunOptions run_opts = opts;
  run_opts.x0 = center;
  run_opts.measure = &base;
  return run_with_stopping(SolverKind::re_agm, *reg_oracle, rule, 3.0 * alpha, budget, run_opts);
}

}  // namespace ngl
