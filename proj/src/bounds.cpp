#include "ngl/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ngl {

namespace {

void require(bool ok, const std::string& hypothesis) {
  if (!ok) throw HypothesisViolation("hypothesis violated: " + hypothesis);
}

void require_strongly_convex(const EnvelopeConstants& c) {
  require(c.mu > 0.0, "mu > 0");
  require(c.L >= c.mu, "mu <= L");
}

void require_alpha_below_one(double alpha) {
  require(alpha >= 0.0 && alpha < 1.0, "0 <= alpha < 1");
}

void require_nonnegative(double value, const std::string& name) {
  require(value >= 0.0 && std::isfinite(value), name + " >= 0");
}

std::int64_t ceil_count(double x) {
  if (!(x > 0.0)) return 0;
  if (x > 9.0e18) throw HypothesisViolation("iteration budget overflows a 64-bit count");
  return static_cast<std::int64_t>(std::ceil(x));
}

double reagm_rate(double mu, double L, double alpha) {
  return std::pow(mu / L, 1.0 - gamma_star(mu, L, alpha)) / 300.0;
}

double reagm_floor(double mu, double L, double alpha, double delta) {
  return (2.0 * std::pow(L / mu, gamma_star(mu, L, alpha)) + 5.0) * delta * delta / mu;
}

double gd_pl_rate(double mu, double L, double alpha) {
  return std::pow(1.0 - alpha, 3) / (1.0 + alpha) * mu / (8.0 * L);
}

double gd_pl_floor(double mu, double alpha, double delta) {
  return 1.5 * (1.0 + alpha) / std::pow(1.0 - alpha, 3) * delta * delta / mu;
}

// gamma_0 = min{1/2, log_{mu/2L}(6 alpha)}.
double gamma_zero(double mu, double L, double alpha) {
  if (alpha <= 0.0) return 0.5;
  return std::min(0.5, std::log(6.0 * alpha) / std::log(mu / (2.0 * L)));
}

void require_regularization_inputs(const EnvelopeConstants& c, double epsilon, bool strict) {
  require(c.L > 0.0, "L > 0");
  require(c.R > 0.0, "R > 0");
  require(epsilon > 0.0, "epsilon > 0");
  const double lr2 = c.L * c.R * c.R;
  if (strict) {
    require(epsilon < lr2, "epsilon < L R^2");
  } else {
    require(epsilon <= lr2, "epsilon <= L R^2");
  }
}

}  // namespace

TheoremId parse_theorem(const std::string& text) {
  static const std::pair<const char*, TheoremId> table[] = {
      {"GD_PL", TheoremId::GD_PL},
      {"GD_MINGRAD", TheoremId::GD_MINGRAD},
      {"REAGM", TheoremId::REAGM},
      {"GD_REG", TheoremId::GD_REG},
      {"REAGM_REG", TheoremId::REAGM_REG},
      {"ADAPT_BOTH", TheoremId::ADAPT_BOTH},
      {"ADAPT_ALPHA", TheoremId::ADAPT_ALPHA},
      {"STOP_GENERIC", TheoremId::STOP_GENERIC},
      {"REAGM_STOP", TheoremId::REAGM_STOP},
      {"COMBINED_REG_STOP", TheoremId::COMBINED_REG_STOP},
  };
  for (const auto& [name, id] : table) {
    if (text == name) return id;
  }
  throw InvalidInput("unknown theorem '" + text + "'");
}

std::string to_string(TheoremId id) {
  switch (id) {
    case TheoremId::GD_PL: return "GD_PL";
    case TheoremId::GD_MINGRAD: return "GD_MINGRAD";
    case TheoremId::REAGM: return "REAGM";
    case TheoremId::GD_REG: return "GD_REG";
    case TheoremId::REAGM_REG: return "REAGM_REG";
    case TheoremId::ADAPT_BOTH: return "ADAPT_BOTH";
    case TheoremId::ADAPT_ALPHA: return "ADAPT_ALPHA";
    case TheoremId::STOP_GENERIC: return "STOP_GENERIC";
    case TheoremId::REAGM_STOP: return "REAGM_STOP";
    case TheoremId::COMBINED_REG_STOP: return "COMBINED_REG_STOP";
  }
  return "unknown";
}

Envelope::Envelope(TheoremId id, Shape shape, double prefactor, double rate, double floor)
    : id_(id), shape_(shape), prefactor_(prefactor), rate_(rate), floor_(floor) {
  if (!(prefactor >= 0.0) || !std::isfinite(prefactor)) {
    throw InvalidInput("envelope prefactor must be finite and non-negative");
  }
  if (!(floor >= 0.0)) throw InvalidInput("envelope floor must be non-negative");
  if (shape == Shape::geometric && !(rate >= 0.0 && rate < 1.0)) {
    throw InvalidInput("envelope contraction rate must lie in [0, 1)");
  }
  if (shape == Shape::exponential && !(rate >= 0.0)) {
    throw InvalidInput("envelope exponential rate must be non-negative");
  }
}

double Envelope::value(std::int64_t N) const {
  if (N < 0) throw InvalidInput("envelope evaluated at negative N");
  const double n = static_cast<double>(N);
  switch (shape_) {
    case Shape::geometric:
      // log1p keeps (1 - r)^N accurate for tiny r and huge N.
      return prefactor_ * std::exp(n * std::log1p(-rate_)) + floor_;
    case Shape::harmonic:
      return prefactor_ / (n + 1.0) + floor_;
    case Shape::exponential:
      return prefactor_ * std::exp(-rate_ * n) + floor_;
  }
  return std::numeric_limits<double>::infinity();
}

std::optional<std::int64_t> Envelope::steps_to_reach(double target) const {
  if (!(target > floor_)) return std::nullopt;
  if (value(0) <= target) return 0;
  const double excess = target - floor_;
  double guess = 0.0;
  switch (shape_) {
    case Shape::geometric:
      if (rate_ == 0.0) return std::nullopt;
      guess = std::log(excess / prefactor_) / std::log1p(-rate_);
      break;
    case Shape::harmonic:
      guess = prefactor_ / excess - 1.0;
      break;
    case Shape::exponential:
      if (rate_ == 0.0) return std::nullopt;
      guess = std::log(prefactor_ / excess) / rate_;
      break;
  }
  std::int64_t N = ceil_count(guess);
  while (value(N) > target) ++N;
  while (N > 0 && value(N - 1) <= target) --N;
  return N;
}

double gamma_star(double mu, double L, double alpha) {
  if (!(mu > 0.0) || !(L >= mu)) throw InvalidInput("gamma_star requires 0 < mu <= L");
  if (!(alpha >= 0.0)) throw InvalidInput("gamma_star requires alpha >= 0");
  if (alpha == 0.0) return 0.5;
  return std::min(std::log(3.0 * alpha) / std::log(mu / (2.0 * L)), 0.5);
}

Envelope envelope(TheoremId id, const EnvelopeConstants& c) {
  require_nonnegative(c.delta, "delta");
  require_nonnegative(c.f0_gap, "f0_gap");
  using Shape = Envelope::Shape;
  switch (id) {
    case TheoremId::GD_PL:
      require_strongly_convex(c);
      require_alpha_below_one(c.alpha);
      return Envelope(id, Shape::geometric, c.f0_gap, gd_pl_rate(c.mu, c.L, c.alpha),
                      gd_pl_floor(c.mu, c.alpha, c.delta));
    case TheoremId::GD_MINGRAD: {
      require(c.L > 0.0, "L > 0");
      require_alpha_below_one(c.alpha);
      const double a = c.alpha;
      return Envelope(id, Shape::harmonic,
                      (1.0 + a) / std::pow(1.0 - a, 3) * 16.0 * c.L * c.f0_gap, 0.0,
                      3.0 * c.delta * c.delta / (std::pow(1.0 - a, 3) * (1.0 + a)));
    }
    case TheoremId::REAGM:
      require_strongly_convex(c);
      require(c.alpha >= 0.0 && c.alpha <= 1.0 / 3.0, "0 <= alpha <= 1/3");
      return Envelope(id, Shape::geometric, c.f0_gap + c.mu * c.R * c.R / 4.0,
                      reagm_rate(c.mu, c.L, c.alpha), reagm_floor(c.mu, c.L, c.alpha, c.delta));
    case TheoremId::GD_REG: {
      require(c.mu > 0.0, "regularization weight mu > 0");
      require(c.L > 0.0, "L > 0");
      require(c.alpha >= 0.0 && c.alpha < 0.5, "0 <= alpha < 1/2");
      const double Lr = c.L + c.mu;
      const double a2 = 2.0 * c.alpha;
      const double d2 = c.alpha * c.mu * c.R + c.delta;
      return Envelope(id, Shape::geometric, c.f0_gap, gd_pl_rate(c.mu, Lr, a2),
                      gd_pl_floor(c.mu, a2, d2) + c.mu * c.R * c.R / 2.0);
    }
    case TheoremId::REAGM_REG: {
      require(c.mu > 0.0, "regularization weight mu > 0");
      require(c.L > 0.0, "L > 0");
      require(c.alpha >= 0.0 && 2.0 * c.alpha <= 1.0 / 3.0,
              "regularized relative level 2 alpha <= 1/3");
      const double Lr = c.L + c.mu;
      const double a2 = 2.0 * c.alpha;
      const double d2 = c.alpha * c.mu * c.R + c.delta;
      return Envelope(id, Shape::geometric, c.f0_gap + c.mu * c.R * c.R / 4.0,
                      reagm_rate(c.mu, Lr, a2),
                      reagm_floor(c.mu, Lr, a2, d2) + c.mu * c.R * c.R / 2.0);
    }
    case TheoremId::ADAPT_BOTH: {
      require_strongly_convex(c);
      require_alpha_below_one(c.alpha);
      require(c.L0 > 0.0, "L0 > 0");
      const double one_minus = 1.0 - c.alpha;
      const double ratio = c.L0 / c.L;
      const double rate = one_minus * one_minus / 256.0 *
                          std::min(one_minus * one_minus, ratio * ratio) * c.mu / c.L0;
      require(rate < 1.0, "contraction factor in (0, 1)");
      const double floor = 200.0 / (one_minus * one_minus) *
                           std::max(1.0 / (one_minus * one_minus), 1.0 / (ratio * ratio)) *
                           c.delta * c.delta / c.mu;
      return Envelope(id, Shape::geometric, c.f0_gap, rate, floor);
    }
    case TheoremId::ADAPT_ALPHA: {
      require_strongly_convex(c);
      require_alpha_below_one(c.alpha);
      const double cube = std::pow(1.0 - c.alpha, 3);
      return Envelope(id, Shape::geometric, c.f0_gap, cube * c.mu / (128.0 * c.L),
                      100.0 * c.delta * c.delta / (cube * c.mu));
    }
    case TheoremId::STOP_GENERIC: {
      require_strongly_convex(c);
      require_alpha_below_one(c.alpha);
      require(c.A0 > 0.0 && c.A0 < 1.0, "0 < A0 < 1");
      require(c.C0 >= 0.0, "C0 >= 0");
      return Envelope(id, Shape::exponential, c.C0, c.A0 * std::pow(c.mu / c.L, c.gamma),
                      stopping_level(c.mu, c.alpha, c.delta, c.K));
    }
    case TheoremId::REAGM_STOP: {
      require_strongly_convex(c);
      require(c.beta >= 0.0 && c.beta <= 0.5, "0 <= beta <= 1/2");
      require(c.alpha >= 0.0 && 6.0 * c.alpha <= 1.0, "alpha <= (1/6)(mu/2L)^gamma_0");
      const double K = 6.0 * std::pow(2.0 * c.L / c.mu, c.beta);
      const double g = std::min(gamma_zero(c.mu, c.L, c.alpha), c.beta);
      return Envelope(id, Shape::exponential, c.f0_gap + c.mu * c.R * c.R / 4.0,
                      std::pow(c.mu / c.L, 1.0 - g) / 300.0,
                      stopping_level(c.mu, c.alpha, c.delta, K));
    }
    case TheoremId::COMBINED_REG_STOP:
      throw InvalidInput("COMBINED_REG_STOP has an iteration budget but no per-step envelope");
  }
  throw InvalidInput("unknown theorem");
}

std::int64_t iteration_budget(TheoremId id, const EnvelopeConstants& c, double epsilon) {
  switch (id) {
    case TheoremId::GD_REG: {
      require_regularization_inputs(c, epsilon, true);
      require(c.alpha >= 0.0 && c.alpha < 0.5, "0 <= alpha < 1/2");
      const double ratio = c.L * c.R * c.R / epsilon;
      const double a = c.alpha;
      return ceil_count(12.0 * (1.0 + a) * (1.0 + a) / std::pow(1.0 - a, 6) * ratio *
                        std::log(2.0 * ratio)) +
             1;
    }
    case TheoremId::REAGM_REG: {
      require_regularization_inputs(c, epsilon, true);
      require(c.beta >= 0.0 && c.beta <= 0.5, "0 <= beta <= 1/2");
      require(c.alpha >= 0.0 &&
                  c.alpha <= re_agm_regularization_alpha_cap(c.L, c.R, epsilon, c.beta) *
                                 (1.0 + 1e-12),
              "alpha <= (1/3)(eps / 12 L R^2)^beta");
      const double ratio = c.L * c.R * c.R / epsilon;
      return ceil_count(150.0 * std::pow(12.0 * ratio, 1.0 - c.beta) * std::log(4.0 * ratio)) +
             1;
    }
    case TheoremId::STOP_GENERIC: {
      require_strongly_convex(c);
      require_alpha_below_one(c.alpha);
      require(c.A0 > 0.0, "A0 > 0");
      require(c.delta > 0.0, "delta > 0");
      const double kt = (1.0 + c.alpha) * c.K + 1.0;
      require(c.K > 1.0 / (1.0 - c.alpha), "K > 1/(1-alpha)");
      const double arg = (1.0 - c.alpha) * (1.0 - c.alpha) / (kt * kt + 1.0) * c.C0 * c.mu /
                         (c.delta * c.delta);
      return ceil_count(std::pow(c.L / c.mu, c.gamma) / c.A0 * std::log(std::max(arg, 1.0)));
    }
    case TheoremId::REAGM_STOP: {
      require_strongly_convex(c);
      require(c.R > 0.0, "R > 0");
      require(c.delta > 0.0, "delta > 0");
      require(c.beta >= 0.0 && c.beta <= 0.5, "0 <= beta <= 1/2");
      require(c.alpha >= 0.0 && 6.0 * c.alpha <= 1.0, "alpha <= (1/6)(mu/2L)^gamma_0");
      const double g = std::min(gamma_zero(c.mu, c.L, c.alpha), c.beta);
      const double kt = 6.0 * (1.0 + c.alpha) * std::pow(2.0 * c.L / c.mu, c.beta) + 1.0;
      const double arg = (1.0 - c.alpha) * (1.0 - c.alpha) / (kt * kt + 1.0) * c.L * c.R *
                         c.R * c.mu / (c.delta * c.delta);
      return ceil_count(300.0 * std::pow(c.L / c.mu, 1.0 - g) * std::log(std::max(arg, 1.0)));
    }
    case TheoremId::COMBINED_REG_STOP: {
      require_regularization_inputs(c, epsilon, false);
      require(c.tau >= 0.0 && c.tau <= 0.5, "0 <= tau <= 1/2");
      require(c.alpha > 0.0 &&
                  c.alpha <= combined_alpha_cap(c.L, c.R, epsilon, c.tau) * (1.0 + 1e-12),
              "0 < alpha <= (1/9)(eps / 2 L R^2)^tau");
      const double ratio = c.L * c.R * c.R / epsilon;
      return ceil_count(72000.0 * std::pow(ratio, 1.0 - c.tau) * std::log(480.0 * ratio));
    }
    case TheoremId::GD_PL:
    case TheoremId::GD_MINGRAD:
    case TheoremId::REAGM:
    case TheoremId::ADAPT_BOTH:
    case TheoremId::ADAPT_ALPHA: {
      const auto n = envelope(id, c).steps_to_reach(epsilon);
      if (!n) throw HypothesisViolation("hypothesis violated: epsilon above the noise floor");
      return *n;
    }
  }
  throw InvalidInput("unknown theorem");
}

double stopping_level(double mu, double alpha, double delta, double K) {
  if (!(mu > 0.0)) throw InvalidInput("stopping_level: mu must be positive");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidInput("stopping_level: alpha must lie in [0, 1)");
  if (!(delta >= 0.0)) throw InvalidInput("stopping_level: delta must be non-negative");
  if (!(K > 1.0 / (1.0 - alpha))) throw InvalidInput("stopping_level: K must exceed 1/(1-alpha)");
  const double kt = (1.0 + alpha) * K + 1.0;
  return (kt * kt + 1.0) * delta * delta / ((1.0 - alpha) * (1.0 - alpha) * mu);
}

double gd_regularization_mu(double alpha, double epsilon, double R) {
  return 2.0 / 3.0 * std::pow(1.0 - alpha, 3) / (1.0 + alpha) * epsilon / (R * R);
}

double re_agm_regularization_mu(double epsilon, double R) { return epsilon / (6.0 * R * R); }

double combined_regularization_mu(double epsilon, double R) { return epsilon / (120.0 * R * R); }

double re_agm_regularization_alpha_cap(double L, double R, double epsilon, double beta) {
  return std::pow(epsilon / (12.0 * L * R * R), beta) / 3.0;
}

double combined_alpha_cap(double L, double R, double epsilon, double tau) {
  return std::pow(epsilon / (2.0 * L * R * R), tau) / 9.0;
}

}  // namespace ngl
