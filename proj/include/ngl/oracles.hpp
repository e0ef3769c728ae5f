#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "ngl/numkit.hpp"
#include "ngl/problems.hpp"

namespace ngl {

// Produces gradient estimates g~(x) with |g~ - grad f(x)| <= alpha |grad f(x)| + delta
// for the declared (alpha, delta). Estimates are a pure function of the point
// and the query index, so a run replays bit-for-bit from its seed.
class GradientOracle {
 public:
  explicit GradientOracle(ProblemPtr problem);
  virtual ~GradientOracle() = default;

  const Problem& problem() const { return *problem_; }
  const ProblemPtr& problem_ptr() const { return problem_; }

  virtual double declared_alpha() const = 0;
  virtual double declared_delta() const = 0;
  // Absolute level that holds at this particular point; oracles whose error
  // depends on |x| override it.
  virtual double declared_delta_at(const Vector& x) const;
  virtual std::string kind() const = 0;

  Vector estimate(const Vector& x, std::uint64_t query) const;

 protected:
  virtual Vector estimate_impl(const Vector& x, const Vector& grad,
                               std::uint64_t query) const = 0;

 private:
  ProblemPtr problem_;
};

using OraclePtr = std::shared_ptr<const GradientOracle>;

enum class NoiseMode { none, sampled_unbiased, adversarial_opposing };

NoiseMode parse_noise_mode(const std::string& text);
std::string to_string(NoiseMode mode);

struct NoiseSpec {
  double alpha = 0.0;
  double delta = 0.0;
  NoiseMode mode = NoiseMode::none;
  std::uint64_t seed = 0;
};

// Relative and absolute parts of one noisy estimate: g~ = grad + zeta_r + zeta_a.
struct NoiseDraw {
  Vector gradient;
  Vector zeta_r;
  Vector zeta_a;
  Vector estimate() const { return gradient + zeta_r + zeta_a; }
};

// sampled_unbiased draws zeta_r uniformly from the ball of radius alpha |grad|
// and zeta_a uniformly from the ball of radius delta, independently.
// adversarial_opposing sets zeta_r = -alpha grad and zeta_a = -delta grad/|grad|.
class NoisyOracle final : public GradientOracle {
 public:
  NoisyOracle(ProblemPtr problem, NoiseSpec spec);

  double declared_alpha() const override;
  double declared_delta() const override;
  std::string kind() const override { return to_string(spec_.mode); }
  const NoiseSpec& spec() const { return spec_; }

  NoiseDraw draw(const Vector& x, std::uint64_t query) const;

 private:
  Vector estimate_impl(const Vector& x, const Vector& grad, std::uint64_t query) const override;
  NoiseDraw draw_from(const Vector& grad, std::uint64_t query) const;

  NoiseSpec spec_;
};

enum class CompressorKind { top_k, sign, sparsify };

CompressorKind parse_compressor(const std::string& text);
std::string to_string(CompressorKind kind);

// Keeps the k largest-magnitude entries; ties go to the lower index.
Vector top_k_compress(const Vector& g, int k);
// mean(|g_j|) * sign(g), with sign(0) = 0.
Vector sign_compress(const Vector& g);
// Rounds each entry to the nearest multiple of 1/m, ties to the even multiple.
Vector sparsify_grid(const Vector& g, int m);

// Applies a compressor to the exact gradient. top_k and sign are relative
// (alpha = sqrt(1 - k/n), sqrt(1 - 1/n)); sparsify is absolute (delta = sqrt(n)/(2m)).
class CompressedOracle final : public GradientOracle {
 public:
  // param is k for top_k, m for sparsify, unused for sign.
  CompressedOracle(ProblemPtr problem, CompressorKind kind, int param = 0);

  double declared_alpha() const override { return alpha_; }
  double declared_delta() const override { return delta_; }
  std::string kind() const override { return "compressed_" + to_string(kind_); }

 private:
  Vector estimate_impl(const Vector& x, const Vector& grad, std::uint64_t query) const override;

  CompressorKind kind_;
  int param_;
  double alpha_ = 0.0;
  double delta_ = 0.0;
};

// Forward differences along the standard basis using function values
// perturbed by uniform noise in [-value_noise, value_noise].
// Error bound: sqrt(n) (L h / 2 + 2 value_noise / h).
Vector finite_difference_gradient(const Problem& p, const Vector& x, double h,
                                  double value_noise, std::uint64_t seed = 0,
                                  std::uint64_t query = 0);

double finite_difference_error_bound(std::size_t n, double L, double h, double value_noise);

class FiniteDifferenceOracle final : public GradientOracle {
 public:
  FiniteDifferenceOracle(ProblemPtr problem, double h, double value_noise,
                         std::uint64_t seed = 0);

  double declared_alpha() const override { return 0.0; }
  double declared_delta() const override;
  std::string kind() const override { return "finite_difference"; }

 private:
  Vector estimate_impl(const Vector& x, const Vector& grad, std::uint64_t query) const override;

  double h_;
  double value_noise_;
  std::uint64_t seed_;
};

struct FpGradient {
  Vector gradient;
  // |computed - exact| in the Euclidean norm, exact meaning host double Ax+b.
  double error = 0.0;
  // 8 (eps + n eps^2) (|b|_1 + |A|_1 |x|_1).
  double bound = 0.0;
};

// Ax + b with every operand, product and compensated-summation step rounded to
// the given precision.
FpGradient fp_quadratic_gradient(const Matrix& A, const Vector& b, const Vector& x,
                                 const PrecisionSpec& spec);

double fp_gradient_error_bound(const Matrix& A, const Vector& b, const Vector& x,
                               const PrecisionSpec& spec);

// Compensated sum with every operation rounded to the given precision.
double fp_kahan_sum(std::span<const double> values, const PrecisionSpec& spec);

// Gradient of a quadratic evaluated in simulated low precision. The error is
// absolute and grows with |x|_1: the declared delta covers the l1 ball of
// radius x_l1_radius, and declared_delta_at gives the pointwise level.
class FloatingPointOracle final : public GradientOracle {
 public:
  FloatingPointOracle(std::shared_ptr<const QuadraticProblem> problem, PrecisionSpec spec,
                      double x_l1_radius);

  double declared_alpha() const override { return 0.0; }
  double declared_delta() const override { return delta_; }
  double declared_delta_at(const Vector& x) const override;
  std::string kind() const override { return "floating_point"; }

 private:
  Vector estimate_impl(const Vector& x, const Vector& grad, std::uint64_t query) const override;

  std::shared_ptr<const QuadraticProblem> quad_;
  PrecisionSpec spec_;
  double delta_;
};

// |g~ - grad| <= alpha |grad| + delta + slack.
bool satisfies_composite_bound(const Vector& estimate, const Vector& grad, double alpha,
                               double delta, double slack = 1e-12);

}  // namespace ngl
