#include "ngl/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ngl/rng.hpp"

namespace ngl {

GradientOracle::GradientOracle(ProblemPtr problem) : problem_(std::move(problem)) {
  if (!problem_) throw InvalidInput("oracle requires a problem");
}

double GradientOracle::declared_delta_at(const Vector&) const { return declared_delta(); }

Vector GradientOracle::estimate(const Vector& x, std::uint64_t query) const {
  Vector grad = problem_->gradient(x);
  return estimate_impl(x, grad, query);
}

NoiseMode parse_noise_mode(const std::string& text) {
  if (text == "none") return NoiseMode::none;
  if (text == "sampled_unbiased" || text == "sampled") return NoiseMode::sampled_unbiased;
  if (text == "adversarial_opposing" || text == "adversarial") {
    return NoiseMode::adversarial_opposing;
  }
  throw InvalidInput("unknown noise mode '" + text + "'");
}

std::string to_string(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::none:
      return "none";
    case NoiseMode::sampled_unbiased:
      return "sampled_unbiased";
    case NoiseMode::adversarial_opposing:
      return "adversarial_opposing";
  }
  return "unknown";
}

namespace {

// Uniform point in the Euclidean ball of the given radius.
Vector uniform_in_ball(Eigen::Index n, double radius, CounterRng& rng) {
  if (radius == 0.0) return Vector::Zero(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector dir(n);
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < n; ++i) dir(i) = normal(rng);
    norm = dir.norm();
  } while (norm == 0.0);
  const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(n));
  return dir * (r / norm);
}

}  // namespace

NoisyOracle::NoisyOracle(ProblemPtr problem, NoiseSpec spec)
    : GradientOracle(std::move(problem)), spec_(spec) {
  if (!(spec_.alpha >= 0.0 && spec_.alpha < 1.0)) {
    throw InvalidInput("noise alpha must lie in [0, 1)");
  }
  if (!(spec_.delta >= 0.0) || !std::isfinite(spec_.delta)) {
    throw InvalidInput("noise delta must be finite and non-negative");
  }
}

double NoisyOracle::declared_alpha() const {
  return spec_.mode == NoiseMode::none ? 0.0 : spec_.alpha;
}

double NoisyOracle::declared_delta() const {
  return spec_.mode == NoiseMode::none ? 0.0 : spec_.delta;
}

NoiseDraw NoisyOracle::draw(const Vector& x, std::uint64_t query) const {
  return draw_from(problem().gradient(x), query);
}

NoiseDraw NoisyOracle::draw_from(const Vector& grad, std::uint64_t query) const {
  const Eigen::Index n = grad.size();
  NoiseDraw d{grad, Vector::Zero(n), Vector::Zero(n)};
  switch (spec_.mode) {
    case NoiseMode::none:
      break;
    case NoiseMode::sampled_unbiased: {
      CounterRng rng(spec_.seed, query);
      d.zeta_r = uniform_in_ball(n, spec_.alpha * grad.norm(), rng);
      d.zeta_a = uniform_in_ball(n, spec_.delta, rng);
      break;
    }
    case NoiseMode::adversarial_opposing: {
      d.zeta_r = -spec_.alpha * grad;
      const double gn = grad.norm();
      if (gn > 0.0) d.zeta_a = (-spec_.delta / gn) * grad;
      break;
    }
  }
  return d;
}

Vector NoisyOracle::estimate_impl(const Vector&, const Vector& grad, std::uint64_t query) const {
  if (spec_.mode == NoiseMode::none) return grad;
  return draw_from(grad, query).estimate();
}

CompressorKind parse_compressor(const std::string& text) {
  if (text == "top_k") return CompressorKind::top_k;
  if (text == "sign") return CompressorKind::sign;
  if (text == "sparsify") return CompressorKind::sparsify;
  throw InvalidInput("unknown compressor '" + text + "'");
}

std::string to_string(CompressorKind kind) {
  switch (kind) {
    case CompressorKind::top_k:
      return "top_k";
    case CompressorKind::sign:
      return "sign";
    case CompressorKind::sparsify:
      return "sparsify";
  }
  return "unknown";
}

Vector top_k_compress(const Vector& g, int k) {
  const Eigen::Index n = g.size();
  if (k < 1 || k > n) throw InvalidInput("top_k_compress: k must satisfy 1 <= k <= n");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(g(a)) > std::abs(g(b));
  });
  Vector out = Vector::Zero(n);
  for (int i = 0; i < k; ++i) out(order[i]) = g(order[i]);
  return out;
}

Vector sign_compress(const Vector& g) {
  if (g.size() == 0) throw InvalidInput("sign_compress: empty vector");
  const double scale = g.cwiseAbs().mean();
  Vector out(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    out(i) = g(i) > 0.0 ? scale : (g(i) < 0.0 ? -scale : 0.0);
  }
  return out;
}

Vector sparsify_grid(const Vector& g, int m) {
  if (m < 1) throw InvalidInput("sparsify_grid: m must be at least 1");
  const double md = static_cast<double>(m);
  Vector out(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) out(i) = std::nearbyint(g(i) * md) / md;
  return out;
}

CompressedOracle::CompressedOracle(ProblemPtr problem, CompressorKind kind, int param)
    : GradientOracle(std::move(problem)), kind_(kind), param_(param) {
  const double n = static_cast<double>(this->problem().dim());
  switch (kind_) {
    case CompressorKind::top_k:
      if (param_ < 1 || param_ > static_cast<int>(n)) {
        throw InvalidInput("top_k compressor: k must satisfy 1 <= k <= n");
      }
      alpha_ = std::sqrt(1.0 - param_ / n);
      break;
    case CompressorKind::sign:
      alpha_ = std::sqrt(1.0 - 1.0 / n);
      break;
    case CompressorKind::sparsify:
      if (param_ < 1) throw InvalidInput("sparsify compressor: m must be at least 1");
      delta_ = std::sqrt(n) / (2.0 * param_);
      break;
  }
}

Vector CompressedOracle::estimate_impl(const Vector&, const Vector& grad, std::uint64_t) const {
  switch (kind_) {
    case CompressorKind::top_k:
      return top_k_compress(grad, param_);
    case CompressorKind::sign:
      return sign_compress(grad);
    case CompressorKind::sparsify:
      return sparsify_grid(grad, param_);
  }
  return grad;
}

Vector finite_difference_gradient(const Problem& p, const Vector& x, double h,
                                  double value_noise, std::uint64_t seed, std::uint64_t query) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidInput("finite differences: h must be positive");
  if (!(value_noise >= 0.0)) throw InvalidInput("finite differences: value noise must be >= 0");
  CounterRng rng(seed ^ 0x5fd1f1e5c0ffeeULL, query);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto noisy = [&](const Vector& z) {
    const double f = p.value(z);
    return value_noise > 0.0 ? f + value_noise * unit(rng) : f;
  };
  const double f0 = noisy(x);
  Vector g(x.size());
  Vector z = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    z(i) = x(i) + h;
    g(i) = (noisy(z) - f0) / h;
    z(i) = x(i);
  }
  return g;
}

double finite_difference_error_bound(std::size_t n, double L, double h, double value_noise) {
  return std::sqrt(static_cast<double>(n)) * (L * h / 2.0 + 2.0 * value_noise / h);
}

FiniteDifferenceOracle::FiniteDifferenceOracle(ProblemPtr problem, double h, double value_noise,
                                               std::uint64_t seed)
    : GradientOracle(std::move(problem)), h_(h), value_noise_(value_noise), seed_(seed) {
  if (!(h > 0.0)) throw InvalidInput("finite differences: h must be positive");
  if (!(value_noise >= 0.0)) throw InvalidInput("finite differences: value noise must be >= 0");
}

double FiniteDifferenceOracle::declared_delta() const {
  return finite_difference_error_bound(problem().dim(), problem().L(), h_, value_noise_);
}

Vector FiniteDifferenceOracle::estimate_impl(const Vector& x, const Vector&,
                                             std::uint64_t query) const {
  return finite_difference_gradient(problem(), x, h_, value_noise_, seed_, query);
}

double fp_kahan_sum(std::span<const double> values, const PrecisionSpec& spec) {
  auto r = [&](double v) { return round_to_precision(v, spec); };
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput("fp_kahan_sum: non-finite input");
    const double t = r(sum + v);
    const double low = std::abs(sum) >= std::abs(v) ? r(r(sum - t) + v) : r(r(v - t) + sum);
    comp = r(comp + low);
    sum = t;
  }
  return r(sum + comp);
}

double fp_gradient_error_bound(const Matrix& A, const Vector& b, const Vector& x,
                               const PrecisionSpec& spec) {
  const double eps = spec.epsilon();
  const double n = static_cast<double>(b.size());
  const double a_norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  return 8.0 * (eps + n * eps * eps) * (norm1(b) + a_norm1 * norm1(x));
}

FpGradient fp_quadratic_gradient(const Matrix& A, const Vector& b, const Vector& x,
                                 const PrecisionSpec& spec) {
  const Eigen::Index n = b.size();
  if (A.rows() != n || A.cols() != n) {
    throw DimensionMismatch(static_cast<std::size_t>(n), static_cast<std::size_t>(A.rows()));
  }
  require_same_dim(b, x);
  auto r = [&](double v) { return round_to_precision(v, spec); };
  Vector xr(n);
  for (Eigen::Index j = 0; j < n; ++j) xr(j) = r(x(j));
  std::vector<double> terms(static_cast<std::size_t>(n) + 1);
  FpGradient out;
  out.gradient.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    terms[0] = r(b(k));
    for (Eigen::Index j = 0; j < n; ++j) {
      terms[static_cast<std::size_t>(j) + 1] = r(r(A(k, j)) * xr(j));
    }
    out.gradient(k) = fp_kahan_sum(terms, spec);
  }
  out.error = (out.gradient - (A * x + b)).norm();
  out.bound = fp_gradient_error_bound(A, b, x, spec);
  return out;
}

FloatingPointOracle::FloatingPointOracle(std::shared_ptr<const QuadraticProblem> problem,
                                         PrecisionSpec spec, double x_l1_radius)
    : GradientOracle(problem), quad_(std::move(problem)), spec_(spec) {
  if (!(x_l1_radius >= 0.0)) throw InvalidInput("floating-point oracle: radius must be >= 0");
  Vector probe = Vector::Zero(quad_->b().size());
  probe(0) = x_l1_radius;
  delta_ = fp_gradient_error_bound(quad_->A(), quad_->b(), probe, spec_);
}

double FloatingPointOracle::declared_delta_at(const Vector& x) const {
  return fp_gradient_error_bound(quad_->A(), quad_->b(), x, spec_);
}

Vector FloatingPointOracle::estimate_impl(const Vector& x, const Vector&, std::uint64_t) const {
  return fp_quadratic_gradient(quad_->A(), quad_->b(), x, spec_).gradient;
}

bool satisfies_composite_bound(const Vector& estimate, const Vector& grad, double alpha,
                               double delta, double slack) {
  return (estimate - grad).norm() <= alpha * grad.norm() + delta + slack;
}

}  // namespace ngl
