#include "ngl/harness/verify.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

#include "ngl/bounds.hpp"
#include "ngl/harness/experiment.hpp"
#include "ngl/drivers.hpp"
#include "ngl/problems.hpp"
#include "ngl/rng.hpp"

namespace ngl::harness {

namespace {

Vector random_vector(CounterRng& rng, int n, double spread) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> expo(-spread, spread);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng) * std::pow(10.0, expo(rng));
  return v;
}

// Counts rows above the envelope, with slack 1e-9 max(1, f0).
int envelope_violations(const RunTrace& trace, const Envelope& env, double f0) {
  int bad = 0;
  for (const auto& row : trace.rows) {
    if (!(row.f_gap <= env.value(row.k) + 1e-9 * std::max(1.0, f0))) ++bad;
  }
  return bad;
}

CheckResult gd_envelope(const VerifyOptions& opt) {
  CheckResult r{"gd envelope, strongly convex grid", true, ""};
  auto p = nesterov_strongly_convex(1.0, 100.0, 100);
  const Vector x0 = Vector::Zero(100);
  const double f0 = p->gap(x0);
  int runs = 0;
  int bad = 0;
  for (double alpha : {0.0, 0.25, 0.5}) {
    for (double delta : {0.0, 0.1}) {
      for (NoiseMode mode : {NoiseMode::sampled_unbiased, NoiseMode::adversarial_opposing}) {
        NoisyOracle oracle(p, NoiseSpec{alpha, delta, mode, 7});
        RunOptions o;
        o.x0 = x0;
        EnvelopeConstants c;
        c.mu = 1.0;
        c.L = 100.0;
        c.alpha = alpha;
        c.delta = delta;
        c.f0_gap = f0;
        const Envelope env = envelope(TheoremId::GD_PL, c);
        ++runs;
        try {
          bad += envelope_violations(
              gd_run(oracle, GDConfig{2000, alpha, 100.0, opt.step_scale}, o), env, f0);
        } catch (const SolverError&) {
          ++bad;
        }
      }
    }
  }
  r.passed = bad == 0;
  r.detail = std::to_string(runs) + " runs, " + std::to_string(bad) + " violations";
  return r;
}

CheckResult gd_descent() {
  CheckResult r{"gd per-step descent inequality", true, ""};
  auto p = nesterov_strongly_convex(1.0, 100.0, 100);
  int bad = 0;
  for (double alpha : {0.0, 0.25, 0.5}) {
    NoisyOracle oracle(p, NoiseSpec{alpha, 0.1, NoiseMode::adversarial_opposing, 3});
    const GDConfig cfg{500, alpha, 100.0};
    if (!gd_theoretical_descent_check(gd_run(oracle, cfg), *p, cfg, 0.1)) ++bad;
  }
  r.passed = bad == 0;
  r.detail = std::to_string(bad) + " failing configurations";
  return r;
}

CheckResult re_agm_bracket() {
  CheckResult r{"re-agm omega bracket and residual", true, ""};
  int bad = 0;
  int cases = 0;
  for (double ratio : {1e-4, 1e-3, 1e-2, 1e-1, 0.5}) {
    for (double alpha : {0.0, 0.01, 0.1, 1.0 / 3.0}) {
      ++cases;
      const ReAgmParameters prm = re_agm_calculate_parameters(ratio, 1.0, alpha);
      const double w = prm.omega;
      const double lower = std::pow(ratio / 2.0, 1.0 - prm.gamma_star) / 150.0;
      const double residual = std::abs(prm.m * w * w + (prm.s - prm.m) * w - prm.q);
      if (!(w >= lower && w < 1.0 && residual <= 1e-12 * std::max(1.0, prm.q))) ++bad;
    }
  }
  r.passed = bad == 0;
  r.detail = std::to_string(cases) + " grid points, " + std::to_string(bad) + " failures";
  return r;
}

CheckResult re_agm_envelope(const VerifyOptions& opt) {
  CheckResult r{"re-agm envelope, delta = 100", true, ""};
  const double mu = 0.01;
  const double L = 100.0;
  auto p = nesterov_strongly_convex(mu, L, 100);
  const Vector x0 = Vector::Zero(100);
  const double f0 = p->gap(x0);
  int bad = 0;
  for (double alpha : {std::sqrt(mu / (2.0 * L)) / 3.0, 0.028, 1.0 / 3.0}) {
    NoisyOracle oracle(p, NoiseSpec{alpha, 100.0, NoiseMode::sampled_unbiased, 11});
    EnvelopeConstants c;
    c.mu = mu;
    c.L = L;
    c.alpha = alpha;
    c.delta = 100.0;
    c.f0_gap = f0;
    c.R = p->x_star().norm();
    try {
      RunOptions o;
      o.x0 = x0;
      bad += envelope_violations(
          re_agm_run(oracle, ReAgmConfig{5000, mu, L, alpha, opt.step_scale}, o),
          envelope(TheoremId::REAGM, c), f0);
    } catch (const SolverError&) {
      ++bad;
    }
  }
  r.passed = bad == 0;
  r.detail = std::to_string(bad) + " violations";
  return r;
}

CheckResult composite_bound() {
  CheckResult r{"noisy oracle composite bound, 1000 queries", true, ""};
  auto p = nesterov_strongly_convex(1.0, 100.0, 50);
  CounterRng rng(5, 0);
  int bad = 0;
  for (NoiseMode mode : {NoiseMode::sampled_unbiased, NoiseMode::adversarial_opposing}) {
    NoisyOracle oracle(p, NoiseSpec{0.3, 0.05, mode, 9});
    for (std::uint64_t q = 0; q < 1000; ++q) {
      const Vector x = random_vector(rng, 50, 1.0);
      if (!satisfies_composite_bound(oracle.estimate(x, q), p->gradient(x), 0.3, 0.05)) ++bad;
    }
  }
  r.passed = bad == 0;
  r.detail = std::to_string(bad) + " violations";
  return r;
}

CheckResult compressors() {
  CheckResult r{"compressor error bounds, 1000 vectors each", true, ""};
  CounterRng rng(13, 0);
  const int n = 40;
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vector g = random_vector(rng, n, 3.0);
    const double gn = g.norm();
    const int k = 1 + i % n;
    if ((top_k_compress(g, k) - g).norm() > std::sqrt(1.0 - double(k) / n) * gn + 1e-12) ++bad;
    if ((sign_compress(g) - g).norm() > std::sqrt(1.0 - 1.0 / n) * gn + 1e-12) ++bad;
    const int m = 1 + i % 17;
    if ((sparsify_grid(g, m) - g).norm() > std::sqrt(double(n)) / (2.0 * m) + 1e-12) ++bad;
  }
  r.passed = bad == 0;
  r.detail = std::to_string(bad) + " violations";
  return r;
}

CheckResult regularized_oracle() {
  CheckResult r{"regularized oracle levels, 1000 queries", true, ""};
  auto base = nesterov_convex(10, 100.0, 50);
  const double R = base->x_star().norm();
  auto oracle = std::make_shared<NoisyOracle>(
      base, NoiseSpec{0.2, 0.0, NoiseMode::sampled_unbiased, 17});
  auto reg = regularize(base, Vector::Zero(50), 0.05);
  RegularizedOracle ro(reg, oracle, R);
  CounterRng rng(19, 0);
  int bad = 0;
  for (std::uint64_t q = 0; q < 1000; ++q) {
    const Vector x = random_vector(rng, 50, 0.5);
    if (!satisfies_composite_bound(ro.estimate(x, q), reg->gradient(x), ro.declared_alpha(),
                                   ro.declared_delta())) {
      ++bad;
    }
  }
  if (reg->R_mu() > R + 1e-8) ++bad;
  r.passed = bad == 0;
  r.detail = std::to_string(bad) + " violations";
  return r;
}

CheckResult stopping_soundness() {
  CheckResult r{"stopping rule soundness", true, ""};
  auto p = nesterov_strongly_convex(1.0, 100.0, 100);
  NoisyOracle oracle(p, NoiseSpec{0.0, 1e-3, NoiseMode::adversarial_opposing, 0});
  const StoppingRule rule(10.0, 1e-3, 0.0);
  const RunTrace t = run_with_stopping(SolverKind::re_agm, oracle, rule, 0.1, 100000);
  const double level = rule.level(1.0);
  r.passed = t.reason == TerminalReason::stopping_rule && t.final_f_gap <= level * (1.0 + 1e-9);
  std::ostringstream d;
  d << "gap " << t.final_f_gap << " vs level " << level << " after " << t.iterations;
  r.detail = d.str();
  return r;
}

CheckResult adaptive_inner_loops() {
  CheckResult r{"adaptive inner-loop total", true, ""};
  auto p = nesterov_strongly_convex(1.0, 100.0, 100);
  int bad = 0;
  for (double alpha : {0.0, 0.3, 0.7}) {
    NoisyOracle oracle(p, NoiseSpec{alpha, 0.0, NoiseMode::adversarial_opposing, 0});
    const std::int64_t N = 500;
    const RunTrace t = adaptive_gd_run(oracle, AdaptiveGDConfig{N, 100.0, 0.0, false});
    const double cap = N + std::log2(1.0 / (1.0 - alpha)) + 1.0;
    if (static_cast<double>(N + t.inner_loop_total) > cap) ++bad;
  }
  r.passed = bad == 0;
  r.detail = std::to_string(bad) + " failures";
  return r;
}

CheckResult finite_difference() {
  CheckResult r{"finite-difference error on a quadratic", true, ""};
  const int n = 20;
  auto q = quadratic(Matrix::Identity(n, n), Vector::Zero(n));
  CounterRng rng(23, 0);
  int bad = 0;
  for (double h : {1e-1, 1e-2, 1e-3}) {
    const Vector x = random_vector(rng, n, 0.0);
    const Vector fd = finite_difference_gradient(*q, x, h, 0.0);
    const double err = (fd - q->gradient(x)).norm();
    if (std::abs(err - std::sqrt(double(n)) * h / 2.0) > 1e-9) ++bad;
  }
  r.passed = bad == 0;
  r.detail = std::to_string(bad) + " failures";
  return r;
}

}  // namespace

std::vector<CheckResult> run_verify_suite(const VerifyOptions& options) {
  std::vector<std::function<CheckResult()>> checks = {
      [&] { return gd_envelope(options); },
      gd_descent,
      re_agm_bracket,
      [&] { return re_agm_envelope(options); },
      composite_bound,
      compressors,
      regularized_oracle,
      stopping_soundness,
      adaptive_inner_loops,
      finite_difference,
  };
  std::vector<CheckResult> results;
  for (const auto& check : checks) {
    try {
      results.push_back(check());
    } catch (const std::exception& e) {
      results.push_back({"check raised", false, e.what()});
    }
  }
  return results;
}

int cli_verify(const VerifyOptions& options, std::ostream& out) {
  const auto results = run_verify_suite(options);
  int failed = 0;
  for (const auto& r : results) {
    out << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.detail << ")\n";
    if (!r.passed) ++failed;
  }
  out << results.size() - failed << "/" << results.size() << " checks passed\n";
  // A failed check is an envelope or invariant violation.
  return failed == 0 ? kExitOk : kExitEnvelope;
}

}  // namespace ngl::harness
