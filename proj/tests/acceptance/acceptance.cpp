// One PASS/FAIL line per acceptance criterion; exits non-zero when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ngl/bounds.hpp"
#include "ngl/drivers.hpp"
#include "ngl/solvers.hpp"

using namespace ngl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

const NoiseMode kModes[] = {NoiseMode::sampled_unbiased, NoiseMode::adversarial_opposing};

EnvelopeConstants constants(const Problem& p, double alpha, double delta, double f0,
                            double R = 0.0) {
  EnvelopeConstants c;
  c.mu = p.mu();
  c.L = p.L();
  c.alpha = alpha;
  c.delta = delta;
  c.f0_gap = f0;
  c.R = R;
  return c;
}

// Rows above the envelope with slack 1e-9 max(1, f0).
std::int64_t violations(const RunTrace& t, const Envelope& env) {
  const double slack = 1e-9 * std::max(1.0, t.rows.front().f_gap);
  std::int64_t v = 0;
  for (const auto& r : t.rows) v += r.f_gap > env(r.k) + slack;
  return v;
}

Outcome ac1() {
  Outcome o;
  const auto t0 = Clock::now();
  auto p = nesterov_strongly_convex(1.0, 100.0, 100);
  std::int64_t total = 0;
  int runs = 0;
  for (double a : {0.0, 0.25, 0.5}) {
    for (double d : {0.0, 0.1}) {
      for (auto mode : kModes) {
        NoisyOracle oracle(p, NoiseSpec{a, d, mode, 1});
        const auto t = gd_run(oracle, GDConfig{10000, a, 100.0});
        const auto env = envelope(TheoremId::GD_PL, constants(*p, a, d, t.rows[0].f_gap));
        total += violations(t, env);
        ++runs;
      }
    }
  }
  const double secs = seconds_since(t0);
  o.detail << runs << " runs, " << total << " violations, " << secs << " s";
  o.require(total == 0, "envelope violated");
  o.require(secs < 10.0, "runtime >= 10 s");
  return o;
}

Outcome ac2() {
  Outcome o;
  auto p = nesterov_strongly_convex(1.0, 100.0, 100);
  const double a = 0.5, d = 0.1;
  for (auto mode : kModes) {
    NoisyOracle oracle(p, NoiseSpec{a, d, mode, 2});
    const auto t = gd_run(oracle, GDConfig{10000, a, 100.0});
    const double floor = envelope(TheoremId::GD_PL, constants(*p, a, d, 1.0)).floor();
    double best = t.rows[0].f_gap;
    for (const auto& r : t.rows) best = std::min(best, r.f_gap);
    o.detail << to_string(mode) << " min gap " << best << " vs floor " << floor << "; ";
    o.require(best <= floor * (1.0 + 1e-6), to_string(mode) + " above floor");
  }
  return o;
}

Outcome ac3() {
  Outcome o;
  const auto t0 = Clock::now();
  int cells = 0;
  for (double ratio : {1e-4, 1e-3, 1e-2, 1e-1, 0.5}) {
    for (double a : {0.0, 0.01, 0.1, 1.0 / 3.0}) {
      const double L = 1.0, mu = ratio;
      const auto r = re_agm_calculate_parameters(mu, L, a);
      const double lower = std::pow(mu / (2.0 * L), 1.0 - r.gamma_star) / 150.0;
      const double residual = std::abs(r.m * r.omega * r.omega + (r.s - r.m) * r.omega - r.q);
      const bool ok = r.omega >= lower && r.omega < 1.0 &&
                      residual <= 1e-12 * std::max(1.0, r.q);
      o.require(ok, "cell mu/L=" + std::to_string(ratio) + " alpha=" + std::to_string(a));
      ++cells;
    }
  }
  const double secs = seconds_since(t0);
  o.detail << cells << " cells, " << secs << " s";
  o.require(secs < 1.0, "runtime >= 1 s");
  return o;
}

Outcome ac4() {
  Outcome o;
  const auto t0 = Clock::now();
  const double mu = 0.01, L = 100.0, delta = 100.0;
  auto p = nesterov_strongly_convex(mu, L, 100);
  const double R = p->x_star().norm();
  const std::vector<double> alphas{std::sqrt(mu / (2 * L)) / 3.0, 0.028, 1.0 / 3.0};
  std::vector<std::pair<double, double>> gamma_floor;
  std::int64_t total = 0;
  for (double a : alphas) {
    for (auto mode : kModes) {
      NoisyOracle oracle(p, NoiseSpec{a, delta, mode, 4});
      RunOptions opts;
      opts.record_stride = 10;
      const auto t = re_agm_run(oracle, ReAgmConfig{100000, mu, L, a}, opts);
      const auto env = envelope(TheoremId::REAGM, constants(*p, a, delta, t.rows[0].f_gap, R));
      total += violations(t, env);
      // Plateau: mean gap over the last tenth of the run.
      double sum = 0.0;
      int count = 0;
      for (const auto& r : t.rows) {
        if (r.k >= 90000) {
          sum += r.f_gap;
          ++count;
        }
      }
      const double plateau = sum / count;
      o.require(plateau <= env.floor(), "plateau above floor at alpha=" + std::to_string(a));
      if (mode == NoiseMode::sampled_unbiased) {
        o.detail << "alpha " << a << " plateau " << plateau << " floor " << env.floor() << "; ";
        gamma_floor.emplace_back(gamma_star(mu, L, a), env.floor());
      }
    }
  }
  std::sort(gamma_floor.begin(), gamma_floor.end());
  for (std::size_t i = 1; i < gamma_floor.size(); ++i) {
    o.require(gamma_floor[i].second >= gamma_floor[i - 1].second, "floors not monotone in gamma*");
  }
  const double secs = seconds_since(t0);
  o.detail << total << " violations, " << secs << " s";
  o.require(total == 0, "envelope violated");
  o.require(secs < 60.0, "runtime >= 60 s");
  return o;
}

std::int64_t iterations_to(SolverKind kind, const GradientOracle& oracle, double alpha,
                           double target) {
  RunOptions opts;
  opts.target_gap = target;
  opts.record_stride = 1000000;
  const Problem& p = oracle.problem();
  const std::int64_t cap = 20000000;
  const RunTrace t = kind == SolverKind::gd
                         ? gd_run(oracle, GDConfig{cap, alpha, p.L()}, opts)
                         : re_agm_run(oracle, ReAgmConfig{cap, p.mu(), p.L(), alpha}, opts);
  return t.reason == TerminalReason::target_reached ? t.iterations : -1;
}

Outcome ac5() {
  Outcome o;
  const double mu = 0.01, L = 100.0;
  auto p = nesterov_strongly_convex(mu, L, 100);
  const double target = 1e-6 * p->gap(Vector::Zero(100));
  const double a_half = std::sqrt(mu / (2 * L)) / 3.0;
  const double a_quarter = std::pow(mu / (2 * L), 0.25) / 3.0;
  auto count = [&](SolverKind kind, double a) {
    NoisyOracle oracle(p, NoiseSpec{a, 0.0, NoiseMode::sampled_unbiased, 5});
    return iterations_to(kind, oracle, a, target);
  };
  const auto re_half = count(SolverKind::re_agm, a_half);
  const auto re_quarter = count(SolverKind::re_agm, a_quarter);
  const auto re_third = count(SolverKind::re_agm, 1.0 / 3.0);
  const auto gd_half = count(SolverKind::gd, a_half);
  const auto gd_quarter = count(SolverKind::gd, a_quarter);
  const auto gd_third = count(SolverKind::gd, 1.0 / 3.0);
  o.detail << "RE-AGM " << re_half << " / " << re_quarter << " / " << re_third << ", GD "
           << gd_half << " / " << gd_quarter << " / " << gd_third
           << " at alpha 2.36e-3 / 0.0137 / 1/3";
  const bool all = re_half > 0 && re_quarter > 0 && re_third > 0 && gd_half > 0 &&
                   gd_quarter > 0 && gd_third > 0;
  o.require(all, "a run missed the target");
  if (!all) return o;
  o.require(re_half < re_quarter, "RE-AGM(2.36e-3) < RE-AGM(0.0137)");
  o.require(re_quarter < gd_quarter && re_quarter < gd_half,
            "RE-AGM(0.0137) < GD at the same levels");
  const double ratio = static_cast<double>(re_third) / static_cast<double>(gd_third);
  o.detail << ", RE-AGM(1/3)/GD(1/3) = " << ratio;
  o.require(ratio <= 4.0 && ratio >= 0.25, "RE-AGM(1/3) within factor 4 of GD(1/3)");
  return o;
}

Outcome ac6() {
  Outcome o;
  auto p = nesterov_strongly_convex(1.0, 100.0, 100);
  const std::int64_t N = 10000;
  for (double a : {0.0, 0.25, 0.5}) {
    for (auto mode : kModes) {
      NoisyOracle oracle(p, NoiseSpec{a, 0.0, mode, 6});
      const double log_term = std::log2(1.0 / (1.0 - a));
      const auto fixed = adaptive_gd_run(oracle, AdaptiveGDConfig{N, 100.0, 0.0, false});
      o.require(static_cast<double>(fixed.inner_loop_total) <= N + log_term + 1.0,
                "inner budget, L fixed, alpha=" + std::to_string(a));
      const auto env =
          envelope(TheoremId::ADAPT_ALPHA, constants(*p, a, 0.0, fixed.rows[0].f_gap));
      o.require(violations(fixed, env) == 0, "envelope, alpha=" + std::to_string(a));
      const auto both = adaptive_gd_run(oracle, AdaptiveGDConfig{N, 100.0 / 8.0, 0.0, true});
      o.require(static_cast<double>(both.inner_loop_total) <= N + std::max(log_term, 3.0) + 1.0,
                "inner budget, L adapted, alpha=" + std::to_string(a));
      if (mode == NoiseMode::adversarial_opposing) {
        o.detail << "alpha " << a << ": " << fixed.inner_loop_total << " / "
                 << both.inner_loop_total << "; ";
      }
    }
  }
  o.detail << "N = " << N;
  return o;
}

Outcome ac7() {
  Outcome o;
  auto p = nesterov_strongly_convex(1.0, 100.0, 100);
  const double delta = 1e-3, K = 10.0, alpha = 0.0;
  const double alpha_hat = alpha + 1.0 / K;
  const StoppingRule rule(K, delta, alpha);
  const double level = stopping_level(1.0, alpha, delta, K);
  const double R = p->x_star().norm();
  EnvelopeConstants c = constants(*p, alpha, delta, 0.0, R);
  c.K = K;
  c.A0 = 1.0 / 300.0;
  c.gamma = 1.0 - gamma_star(1.0, 100.0, alpha_hat);
  c.C0 = p->gap(Vector::Zero(100)) + 1.0 * R * R / 4.0;
  const std::int64_t n0 = iteration_budget(TheoremId::STOP_GENERIC, c, 0.0);
  o.detail << "level " << level << ", N0 " << n0 << "; ";
  for (auto mode : kModes) {
    NoisyOracle oracle(p, NoiseSpec{alpha, delta, mode, 7});
    const auto t = run_with_stopping(SolverKind::re_agm, oracle, rule, alpha_hat, 10 * n0);
    o.detail << to_string(mode) << " exit " << to_string(t.reason) << " after " << t.iterations
             << " with gap " << t.final_f_gap << "; ";
    o.require(t.reason == TerminalReason::stopping_rule, "rule did not trigger");
    o.require(t.final_f_gap <= level + 1e-12, "gap above level");
    o.require(t.iterations <= n0, "iterations above N0");
  }
  return o;
}

Outcome ac8() {
  Outcome o;
  auto base = nesterov_convex(10, 100.0, 50);
  const double R = base->x_star().norm();
  const double eps = 100.0 * R * R / 100.0;
  for (double a : {0.0, 0.25}) {
    auto oracle = std::make_shared<NoisyOracle>(
        base, NoiseSpec{a, 0.0, NoiseMode::sampled_unbiased, 8});
    EnvelopeConstants c;
    c.L = 100.0;
    c.R = R;
    c.alpha = a;
    const auto budget = iteration_budget(TheoremId::GD_REG, c, eps);
    const auto t = solve_convex_gd(oracle, eps, R);
    o.detail << "gd alpha " << a << ": gap " << t.final_f_gap << " in " << t.iterations << "/"
             << budget << "; ";
    o.require(t.final_f_gap <= eps && t.iterations <= budget,
              "gd alpha=" + std::to_string(a));
  }
  for (double beta : {0.0, 0.5}) {
    const double cap = re_agm_regularization_alpha_cap(100.0, R, eps, beta);
    for (double a : {0.0, cap / 2.0}) {
      auto oracle = std::make_shared<NoisyOracle>(
          base, NoiseSpec{a, 0.0, NoiseMode::sampled_unbiased, 8});
      EnvelopeConstants c;
      c.L = 100.0;
      c.R = R;
      c.alpha = a;
      c.beta = beta;
      const auto budget = iteration_budget(TheoremId::REAGM_REG, c, eps);
      const auto t = solve_convex_re_agm(oracle, eps, beta, R);
      o.detail << "re-agm beta " << beta << " alpha " << a << ": gap " << t.final_f_gap
               << " in " << t.iterations << "/" << budget << "; ";
      o.require(t.final_f_gap <= eps && t.iterations <= budget && !t.hypothesis_warning,
                "re-agm beta=" + std::to_string(beta) + " alpha=" + std::to_string(a));
    }
  }
  return o;
}

Vector random_vec(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

Outcome ac9() {
  Outcome o;
  const double slack = 1e-12;
  auto p = nesterov_strongly_convex(1.0, 10.0, 20);
  Matrix A(3, 3);
  A << 3, 1, 0, 1, 2, 0.5, 0, 0.5, 1;
  Vector b(3);
  b << 1, -1, 2;
  auto q = quadratic(A, b);
  std::vector<OraclePtr> oracles{
      std::make_shared<NoisyOracle>(p, NoiseSpec{0.5, 1.0, NoiseMode::sampled_unbiased, 1}),
      std::make_shared<NoisyOracle>(p, NoiseSpec{0.3, 0.0, NoiseMode::sampled_unbiased, 2}),
      std::make_shared<NoisyOracle>(p, NoiseSpec{0.5, 0.1, NoiseMode::adversarial_opposing, 0}),
      std::make_shared<NoisyOracle>(p, NoiseSpec{0.3, 0.0, NoiseMode::adversarial_opposing, 0}),
      std::make_shared<CompressedOracle>(p, CompressorKind::top_k, 5),
      std::make_shared<CompressedOracle>(p, CompressorKind::sign),
      std::make_shared<CompressedOracle>(p, CompressorKind::sparsify, 4),
      std::make_shared<FiniteDifferenceOracle>(p, 1e-5, 1e-9, 9),
      std::make_shared<FloatingPointOracle>(q, PrecisionSpec(10), 20.0),
  };
  std::mt19937_64 rng(9);
  std::int64_t composite = 0, basic = 0, cosine = 0, decomposition = 0, compressor = 0;
  for (const auto& oracle : oracles) {
    const double a = oracle->declared_alpha();
    for (int t = 0; t < 1000; ++t) {
      const Vector x = random_vec(rng, static_cast<int>(oracle->problem().dim()), 0.5);
      const double d = oracle->declared_delta_at(x);
      const Vector g = oracle->problem().gradient(x);
      const Vector e = oracle->estimate(x, static_cast<std::uint64_t>(t));
      const double gn = g.norm(), en = e.norm();
      composite += !satisfies_composite_bound(e, g, a, d, slack);
      const double ap = 1 + a, am = 1 - a;
      basic += !((am * gn - d <= en + slack) && (en <= ap * gn + d + slack) &&
                 ((en - d) / ap <= gn + slack) && (gn <= (en + d) / am + slack) &&
                 (0.5 * am * am * gn * gn - d * d <= en * en + slack) &&
                 (en * en <= 2 * ap * ap * gn * gn + 2 * d * d + slack) &&
                 (en * en / (2 * ap * ap) - d * d / (ap * ap) <= gn * gn + slack) &&
                 (gn * gn <= 2 / (am * am) * (en * en + d * d) + slack));
      if (d == 0.0) cosine += e.dot(g) < std::sqrt(1 - a * a) * en * gn - slack;
    }
  }
  for (double a : {0.0, 0.25, 0.9}) {
    for (double d : {0.0, 0.5, 3.0}) {
      NoisyOracle oracle(p, NoiseSpec{a, d, NoiseMode::sampled_unbiased, 10});
      for (int t = 0; t < 1000; ++t) {
        const auto draw = oracle.draw(random_vec(rng, 20, 0.5), static_cast<std::uint64_t>(t));
        decomposition += draw.zeta_a.norm() > d + slack ||
                         draw.zeta_r.norm() > a * draw.gradient.norm() + slack;
      }
    }
  }
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + t % 17;
    const Vector g = random_vec(rng, n, 3.0);
    const int k = 1 + t % n;
    const int m = 1 + t % 9;
    const double gn = g.norm();
    compressor += (top_k_compress(g, k) - g).norm() > std::sqrt(1.0 - double(k) / n) * gn + slack;
    compressor += (sign_compress(g) - g).norm() > std::sqrt(1.0 - 1.0 / n) * gn + slack;
    compressor += (sparsify_grid(g, m) - g).norm() > std::sqrt(double(n)) / (2.0 * m) + slack;
  }
  o.detail << "violations: composite " << composite << ", basic-alpha " << basic << ", cosine "
           << cosine << ", decomposition " << decomposition << ", compressors " << compressor;
  o.require(composite + basic + cosine + decomposition + compressor == 0, "violations found");
  return o;
}

Outcome ac10() {
  Outcome o;
  // Minimizer from the tridiagonal solve against a long exact descent.
  auto p = nesterov_strongly_convex(1.0, 100.0, 100);
  Vector x = Vector::Zero(100);
  for (int i = 0; i < 1000000; ++i) x -= p->gradient(x) / p->L();
  const double df = std::abs(p->value(x) - p->f_star());
  o.detail << "|df| " << df << "; ";
  o.require(df <= 1e-8, "tridiagonal minimizer");

  // Compensated sums against exact rationals.
  using boost::multiprecision::cpp_rational;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-20, 20);
  const double eps = std::ldexp(1.0, -52);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> v;
    for (int i = 0; i < 50 + trial % 200; ++i) {
      const double y = std::ldexp(mant(rng), expo(rng));
      v.push_back(y);
      if (i % 3 == 0) v.push_back(-y * 0.999999);
    }
    cpp_rational exact = 0;
    double abs_total = 0.0;
    for (double y : v) {
      exact += cpp_rational(y);
      abs_total += std::abs(y);
    }
    const double err = std::abs(static_cast<double>(cpp_rational(kahan_sum(v)) - exact));
    bad += err > 4.0 * (eps + v.size() * eps * eps) * abs_total;
  }
  o.detail << "kahan violations " << bad << "; ";
  o.require(bad == 0, "kahan bound");

  // Forward differences on 1/2 |x|^2: error sqrt(n) h / 2. Dyadic data keeps it exact.
  auto q = quadratic(Matrix::Identity(4, 4), Vector::Zero(4));
  const double h = std::ldexp(1.0, -13);
  Vector x0(4);
  x0 << 1.0, 2.0, -1.0, 0.5;
  const double fd_err = (finite_difference_gradient(*q, x0, h, 0.0) - x0).norm();
  const double at_zero = finite_difference_gradient(*q, Vector::Zero(4), 1e-4, 0.0).norm();
  const double worst_fd = std::max(std::abs(fd_err - h), std::abs(at_zero - 1e-4));
  o.detail << "fd error deviation " << worst_fd;
  o.require(worst_fd <= 1e-12, "finite-difference error");
  return o;
}

Outcome ac11() {
  Outcome o;
  auto p = nesterov_strongly_convex(1.0, 100.0, 10);
  NoisyOracle oracle(p, NoiseSpec{0.5, 1.0, NoiseMode::sampled_unbiased, 11});
  std::vector<Vector> points{Vector::Zero(10), Vector::Ones(10), Vector::LinSpaced(10, -2.0, 3.0)};
  double worst = 0.0;
  const int draws = 100000;
  std::uint64_t query = 0;
  for (const auto& x : points) {
    const Vector g = p->gradient(x);
    Vector sum = Vector::Zero(10), sq = Vector::Zero(10);
    for (int i = 0; i < draws; ++i) {
      const Vector d = oracle.estimate(x, query++) - g;
      sum += d;
      sq += d.cwiseProduct(d);
    }
    for (int j = 0; j < 10; ++j) {
      const double m = sum(j) / draws;
      const double se = std::sqrt((sq(j) / draws - m * m) / draws);
      worst = std::max(worst, std::abs(m) / se);
    }
  }
  o.detail << "largest |mean| / standard error " << worst;
  o.require(worst <= 4.0, "mean outside 4 standard errors");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1  gd envelope grid", ac1},
      {"AC2  gd noise floor", ac2},
      {"AC3  re-agm parameters", ac3},
      {"AC4  re-agm envelope, delta = 100", ac4},
      {"AC5  gd vs re-agm iteration counts", ac5},
      {"AC6  adaptive inner loops and envelope", ac6},
      {"AC7  stopping rule", ac7},
      {"AC8  regularization", ac8},
      {"AC9  oracle certifications", ac9},
      {"AC10 brute-force oracles", ac10},
      {"AC11 sampled noise unbiasedness", ac11},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failed += !o.pass;
    std::printf("%s  %s  %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
