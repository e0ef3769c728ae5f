#include "ngl/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "ngl/problems.hpp"

namespace ngl::harness {

namespace {

namespace fs = std::filesystem;

std::string real(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ProblemPtr build_problem(const ProblemSpec& p) {
  if (p.family == "nesterov_convex") return nesterov_convex(p.k, p.L, p.n);
  if (p.family == "nesterov_strongly_convex") return nesterov_strongly_convex(p.mu, p.L, p.n);
  Vector eig(p.n);
  for (int i = 0; i < p.n; ++i) {
    if (!p.diag.empty()) {
      eig(i) = p.diag[static_cast<std::size_t>(i)];
    } else {
      eig(i) = p.n == 1 ? p.L : p.mu + (p.L - p.mu) * static_cast<double>(i) / (p.n - 1);
    }
  }
  Matrix A = eig.asDiagonal();
  Vector b = p.b.empty() ? Vector(-eig)
                         : Vector(Eigen::Map<const Vector>(p.b.data(), p.n));
  return quadratic(std::move(A), std::move(b));
}

OraclePtr build_oracle(const ExperimentConfig& cfg, const ProblemPtr& problem, const Vector& x0) {
  const OracleSpec& o = cfg.oracle;
  if (o.kind == "noisy") {
    return std::make_shared<NoisyOracle>(problem, NoiseSpec{o.alpha, o.delta, o.mode, o.seed});
  }
  if (o.kind == "compressed") {
    return std::make_shared<CompressedOracle>(problem, parse_compressor(o.compressor),
                                              o.compressor_param);
  }
  if (o.kind == "finite_difference") {
    return std::make_shared<FiniteDifferenceOracle>(problem, o.fd_h, o.fd_value_noise, o.seed);
  }
  auto quad = std::dynamic_pointer_cast<const QuadraticProblem>(problem);
  if (!quad) throw ConfigError("oracle.kind", 0, "floating_point oracle needs the quadratic family");
  const double radius =
      o.x_l1_radius.value_or(norm1(problem->x_star()) +
                             std::sqrt(static_cast<double>(problem->dim())) *
                                 (x0 - problem->x_star()).norm());
  return std::make_shared<FloatingPointOracle>(quad, PrecisionSpec(o.precision), radius);
}

bool exceeds(double gap, double bound, double scale) {
  return !std::isnan(bound) && gap > bound + 1e-9 * scale;
}

RunSummary summarize(const ExperimentConfig& cfg, const RunTrace& trace, double f0) {
  RunSummary s;
  s.name = cfg.name;
  s.final_f_gap = trace.final_f_gap;
  s.f0_gap = f0;
  s.iterations = trace.iterations;
  s.inner_loop_total = trace.inner_loop_total;
  s.terminal_reason = to_string(trace.reason);
  s.hypothesis_warning = trace.hypothesis_warning;
  s.warning = trace.warning;
  s.stage_ends = trace.stage_ends;
  s.seed = cfg.oracle.seed;
  return s;
}

std::optional<double> row_target(const ExperimentConfig& cfg, const RunSummary& s) {
  if (cfg.solver.target_gap) return *cfg.solver.target_gap;
  if (cfg.solver.target_rel) return *cfg.solver.target_rel * s.f0_gap;
  if (std::isfinite(s.envelope_floor) && s.envelope_floor > 0.0) return 10.0 * s.envelope_floor;
  return std::nullopt;
}

struct Outcome {
  int code = kExitOk;
  std::optional<RunResult> result;
  std::string message;
};

Outcome execute(const ExperimentConfig& cfg) {
  Outcome oc;
  std::ostringstream msg;
  try {
    oc.result = run_experiment(cfg);
  } catch (const HypothesisViolation& e) {
    msg << cfg.name << ": " << e.what() << "\n";
    oc.code = kExitHypothesis;
  } catch (const SolverError& e) {
    msg << cfg.name << ": " << e.what() << "\n";
    RunResult partial;
    partial.trace = e.trace();
    partial.bounds.assign(partial.trace.rows.size(), kNaN);
    partial.summary = summarize(cfg, partial.trace, kNaN);
    partial.summary.terminal_reason = to_string(TerminalReason::envelope_violation);
    partial.summary.envelope_violations = 1;
    oc.result = std::move(partial);
    oc.code = kExitEnvelope;
  } catch (const InvalidInput& e) {
    msg << cfg.name << ": invalid configuration: " << e.what() << "\n";
    oc.code = kExitConfig;
  }
  if (oc.result) {
    try {
      fs::create_directories(cfg.out_dir);
      write_trace_csv(cfg.out_dir + "/trace.csv", *oc.result);
      write_summary_json(cfg.out_dir + "/summary.json", cfg, oc.result->summary);
    } catch (const std::exception& e) {
      msg << cfg.name << ": cannot write output: " << e.what() << "\n";
      oc.code = kExitConfig;
      oc.message = msg.str();
      return oc;
    }
    const RunSummary& s = oc.result->summary;
    if (oc.code == kExitOk && s.envelope_violations > 0) oc.code = kExitEnvelope;
    msg << cfg.name << ": " << s.terminal_reason << " after " << s.iterations
        << " iterations, final gap " << real(s.final_f_gap) << ", envelope violations "
        << s.envelope_violations << "\n";
    if (s.hypothesis_warning) msg << cfg.name << ": warning: " << s.warning << "\n";
  }
  oc.message = msg.str();
  return oc;
}

}  // namespace

Setup build(const ExperimentConfig& cfg) {
  Setup s;
  s.problem = build_problem(cfg.problem);
  s.x0 = Vector::Constant(static_cast<Eigen::Index>(s.problem->dim()), cfg.x0_fill);
  s.oracle = build_oracle(cfg, s.problem, s.x0);
  return s;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  const Setup setup = build(cfg);
  const Problem& p = *setup.problem;
  const GradientOracle& oracle = *setup.oracle;
  const double f0 = p.gap(setup.x0);
  const double scale = std::max(1.0, std::abs(f0));
  const double alpha_oracle = oracle.declared_alpha();
  const double delta = oracle.declared_delta();
  const double alpha = cfg.solver.alpha.value_or(alpha_oracle);
  const double R = cfg.driver.R.value_or((setup.x0 - p.x_star()).norm());
  const double eps = cfg.driver.epsilon;

  RunOptions opts;
  opts.x0 = setup.x0;
  opts.record_stride = cfg.solver.record_stride;
  if (cfg.solver.target_gap) opts.target_gap = *cfg.solver.target_gap;
  if (cfg.solver.target_rel) opts.target_gap = *cfg.solver.target_rel * f0;

  EnvelopeConstants c;
  c.mu = p.mu();
  c.L = p.L();
  c.alpha = alpha;
  c.delta = delta;
  c.f0_gap = f0;
  c.R = R;

  RunTrace trace;
  std::optional<Envelope> env;
  double final_bound = kNaN;
  const SolverKind solver = cfg.solver.kind;
  switch (cfg.driver.kind) {
    case DriverKind::none:
      if (solver == SolverKind::gd) {
        trace = gd_run(oracle, GDConfig{cfg.solver.N, alpha, p.L(), cfg.solver.step_scale}, opts);
        if (p.mu() > 0.0) env = envelope(TheoremId::GD_PL, c);
      } else if (solver == SolverKind::re_agm) {
        trace = re_agm_run(
            oracle, ReAgmConfig{cfg.solver.N, p.mu(), p.L(), alpha, cfg.solver.step_scale}, opts);
        env = envelope(TheoremId::REAGM, c);
      } else {
        const double L0 = cfg.solver.L0.value_or(p.L());
        trace = adaptive_gd_run(oracle, AdaptiveGDConfig{cfg.solver.N, L0, delta, cfg.solver.adapt_L},
                                opts);
        c.alpha = alpha_oracle;
        c.L0 = L0;
        if (p.mu() > 0.0) {
          if (cfg.solver.adapt_L) {
            env = envelope(TheoremId::ADAPT_BOTH, c);
          } else if (L0 == p.L()) {
            env = envelope(TheoremId::ADAPT_ALPHA, c);
          }
        }
      }
      break;
    case DriverKind::regularize:
      trace = solver == SolverKind::gd
                  ? solve_convex_gd(setup.oracle, eps, R, opts)
                  : solve_convex_re_agm(setup.oracle, eps, cfg.driver.beta, R, opts);
      final_bound = eps;
      break;
    case DriverKind::stopping: {
      const StoppingRule rule(cfg.driver.K, delta, alpha_oracle);
      const double alpha_hat = cfg.solver.alpha.value_or(alpha_oracle + 1.0 / cfg.driver.K);
      trace = run_with_stopping(solver, oracle, rule, alpha_hat, cfg.solver.N, opts);
      if (trace.reason == TerminalReason::stopping_rule) final_bound = rule.level(p.mu());
      break;
    }
    case DriverKind::restart:
      trace = restart_to_convex(solver, oracle, eps, opts);
      break;
    case DriverKind::combined:
      trace = combined_reg_stop(setup.oracle, eps, cfg.driver.tau, R, opts);
      final_bound = eps;
      break;
  }

  RunResult res;
  res.summary = summarize(cfg, trace, f0);
  res.bounds.assign(trace.rows.size(), kNaN);
  if (env) {
    res.summary.envelope = to_string(env->id());
    res.summary.envelope_floor = env->floor();
    for (std::size_t i = 0; i < trace.rows.size(); ++i) res.bounds[i] = env->value(trace.rows[i].k);
  }
  if (!trace.rows.empty() && !std::isnan(final_bound)) res.bounds.back() = final_bound;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    if (exceeds(trace.rows[i].f_gap, res.bounds[i], scale)) ++res.summary.envelope_violations;
  }
  if (cfg.driver.kind == DriverKind::stopping || cfg.driver.kind == DriverKind::combined) {
    res.summary.max_relative_noise = trace.max_relative_noise;
  }
  res.trace = std::move(trace);
  res.summary.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

void write_trace_csv(const std::string& path, const RunResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "k,f_gap,grad_norm,noisy_grad_norm,bound,inner_loops\n";
  const auto& rows = result.trace.rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TraceRow& r = rows[i];
    const double bound = i < result.bounds.size() ? result.bounds[i] : kNaN;
    out << r.k << ',' << real(r.f_gap) << ',' << real(r.grad_norm) << ','
        << real(r.noisy_grad_norm) << ',' << real(bound) << ',' << r.inner_loops << '\n';
  }
  if (!out) throw Error("failed writing '" + path + "'");
}

void write_summary_json(const std::string& path, const ExperimentConfig& cfg,
                        const RunSummary& s) {
  auto num = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
  Json j;
  j["name"] = s.name;
  j["problem"] = cfg.problem.family;
  j["oracle"] = cfg.oracle.kind;
  j["solver"] = to_string(cfg.solver.kind);
  j["driver"] = to_string(cfg.driver.kind);
  j["seed"] = s.seed;
  j["iterations"] = s.iterations;
  j["inner_loop_total"] = s.inner_loop_total;
  j["f0_gap"] = num(s.f0_gap);
  j["final_f_gap"] = num(s.final_f_gap);
  j["envelope"] = s.envelope.empty() ? Json(nullptr) : Json(s.envelope);
  j["envelope_floor"] = num(s.envelope_floor);
  j["envelope_violations"] = s.envelope_violations;
  j["terminal_reason"] = s.terminal_reason;
  j["hypothesis_warning"] = s.hypothesis_warning;
  j["warning"] = s.warning;
  j["stage_ends"] = s.stage_ends;
  j["max_relative_noise"] = num(s.max_relative_noise);
  j["wall_time_s"] = s.wall_time_s;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

int cli_run(const std::string& config_path, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    const ConfigDocument doc = load_config_file(config_path);
    // A sweep section must still be well formed; run executes the base point.
    plan_sweep(doc);
    cfg = experiment_from(doc);
    apply_environment(cfg);
    validate(cfg);
  } catch (const InvalidInput& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  const Outcome oc = execute(cfg);
  (oc.code == kExitOk ? out : err) << oc.message;
  return oc.code;
}

int cli_sweep(const std::string& config_path, int jobs, std::ostream& out, std::ostream& err) {
  if (jobs < 1) {
    err << "config error: --jobs must be at least 1\n";
    return kExitConfig;
  }
  SweepPlan plan;
  std::string base_dir;
  try {
    const ConfigDocument doc = load_config_file(config_path);
    plan = plan_sweep(doc);
    for (auto& run : plan.runs) {
      apply_environment(run.config);
      validate(run.config);
    }
    ConfigDocument base = doc;
    if (base.root.is_object()) base.root.erase("sweep");
    base_dir = experiment_from(base).out_dir;
  } catch (const InvalidInput& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::vector<Outcome> outcomes(plan.runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < plan.runs.size(); i = next++) {
      outcomes[i] = execute(plan.runs[i].config);
    }
  };
  const int threads = std::min<int>(jobs, static_cast<int>(plan.runs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kExitOk;
  std::ostringstream csv;
  csv << "run";
  for (const auto& axis : plan.axes) csv << ',' << axis.key;
  csv << ",exit_code,iterations,final_f_gap,iterations_to_target,envelope_violations,"
         "terminal_reason\n";
  for (std::size_t i = 0; i < plan.runs.size(); ++i) {
    const Outcome& oc = outcomes[i];
    (oc.code == kExitOk ? out : err) << oc.message;
    code = std::max(code, oc.code);
    csv << i;
    for (const auto& v : plan.runs[i].point) {
      csv << ',' << (v.is_string() ? v.get<std::string>() : v.dump());
    }
    csv << ',' << oc.code;
    if (oc.result) {
      const RunSummary& s = oc.result->summary;
      std::string reached;
      if (const auto target = row_target(plan.runs[i].config, s)) {
        for (const auto& row : oc.result->trace.rows) {
          if (row.f_gap <= *target) {
            reached = std::to_string(row.k);
            break;
          }
        }
      }
      csv << ',' << s.iterations << ',' << real(s.final_f_gap) << ',' << reached << ','
          << s.envelope_violations << ',' << s.terminal_reason;
    } else {
      csv << ",,,,,";
    }
    csv << '\n';
  }
  try {
    fs::create_directories(base_dir);
    std::ofstream f(base_dir + "/comparison.csv", std::ios::binary);
    if (!f) throw Error("cannot open comparison.csv");
    f << csv.str();
  } catch (const std::exception& e) {
    err << "cannot write comparison: " << e.what() << "\n";
    return kExitConfig;
  }
  return code;
}

int cli_bounds(const std::string& theorem, const std::vector<std::string>& assignments,
               std::ostream& out, std::ostream& err) {
  EnvelopeConstants c;
  std::int64_t n_max = 10000;
  std::optional<double> epsilon;
  TheoremId id;
  try {
    id = parse_theorem(theorem);
    for (const auto& a : assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) throw InvalidInput("expected key=value, got '" + a + "'");
      const std::string key = a.substr(0, eq);
      const std::string text = a.substr(eq + 1);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != text.size() || text.empty()) throw InvalidInput("'" + key + "' needs a number");
      if (key == "mu") c.mu = v;
      else if (key == "L") c.L = v;
      else if (key == "alpha") c.alpha = v;
      else if (key == "delta") c.delta = v;
      else if (key == "f0_gap") c.f0_gap = v;
      else if (key == "R") c.R = v;
      else if (key == "L0") c.L0 = v;
      else if (key == "K") c.K = v;
      else if (key == "beta") c.beta = v;
      else if (key == "tau") c.tau = v;
      else if (key == "A0") c.A0 = v;
      else if (key == "C0") c.C0 = v;
      else if (key == "gamma") c.gamma = v;
      else if (key == "N") n_max = static_cast<std::int64_t>(v);
      else if (key == "epsilon") epsilon = v;
      else throw InvalidInput("unknown constant '" + key + "'");
    }
    if (n_max < 0) throw InvalidInput("N must be non-negative");
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    out << "theorem " << to_string(id) << "\n";
    if (id != TheoremId::COMBINED_REG_STOP) {
      const Envelope env = envelope(id, c);
      out << "floor " << real(env.floor()) << "\n";
      out << "N,bound\n";
      std::vector<std::int64_t> ns{0};
      for (std::int64_t n = 1; n < n_max; n *= 10) ns.push_back(n);
      if (n_max > 0) ns.push_back(n_max);
      for (const auto n : ns) out << n << ',' << real(env.value(n)) << "\n";
    }
    if (epsilon) out << "budget " << iteration_budget(id, c, *epsilon) << "\n";
  } catch (const HypothesisViolation& e) {
    err << "error: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace ngl::harness
