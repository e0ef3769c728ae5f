#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ngl/errors.hpp"

namespace ngl {

enum class TheoremId {
  GD_PL,        // gradient descent, PL functions
  GD_MINGRAD,   // gradient descent, smallest gradient norm
  REAGM,        // accelerated method, strongly convex
  GD_REG,       // gradient descent on a regularized convex problem
  REAGM_REG,    // accelerated method on a regularized convex problem
  ADAPT_BOTH,   // adaptive descent, alpha and L adapted
  ADAPT_ALPHA,  // adaptive descent, alpha adapted, L0 = L
  STOP_GENERIC, // stopping rule around a linearly convergent method
  REAGM_STOP,   // stopping rule around the accelerated method
  COMBINED_REG_STOP,  // regularization plus stopping rule (budget only)
};

TheoremId parse_theorem(const std::string& text);
std::string to_string(TheoremId id);

// Constants a theorem may need. Unused fields are ignored. For the
// regularized theorems mu is the regularization weight and R = |x0 - x*| of
// the base problem; tau is shared by the combined theorem.
struct EnvelopeConstants {
  double mu = 0.0;
  double L = 0.0;
  double alpha = 0.0;
  double delta = 0.0;
  double f0_gap = 0.0;
  double R = 0.0;
  double L0 = 0.0;
  double K = 0.0;
  double beta = 0.0;
  double tau = 0.0;
  // Generic stopping theorem: f - f* <= C0 exp(-A0 (mu/L)^gamma N).
  double A0 = 1.0 / 300.0;
  double C0 = 0.0;
  double gamma = 0.5;
};

// N -> prefactor (1 - rate)^N + floor (geometric), prefactor / (N + 1) + floor
// (harmonic, smallest-gradient theorem) or prefactor exp(-rate N) + floor
// (exponential, stopping theorems).
class Envelope {
 public:
  enum class Shape { geometric, harmonic, exponential };

  Envelope(TheoremId id, Shape shape, double prefactor, double rate, double floor);

  TheoremId id() const { return id_; }
  Shape shape() const { return shape_; }
  double prefactor() const { return prefactor_; }
  double rate() const { return rate_; }
  double floor() const { return floor_; }

  double value(std::int64_t N) const;
  double operator()(std::int64_t N) const { return value(N); }
  // Smallest N with value(N) <= target; empty when target <= floor.
  std::optional<std::int64_t> steps_to_reach(double target) const;

 private:
  TheoremId id_;
  Shape shape_;
  double prefactor_;
  double rate_;
  double floor_;
};

Envelope envelope(TheoremId id, const EnvelopeConstants& c);

// min{log_{mu/2L}(3 alpha), 1/2}; 1/2 when alpha = 0.
double gamma_star(double mu, double L, double alpha);

// Explicit iteration counts of the regularization, stopping and combined
// theorems, as integer ceilings.
std::int64_t iteration_budget(TheoremId id, const EnvelopeConstants& c, double epsilon);

// ((1+alpha) K + 1)^2 + 1) delta^2 / ((1-alpha)^2 mu); requires K > 1/(1-alpha).
double stopping_level(double mu, double alpha, double delta, double K);

// Regularization weights used by the convex drivers.
double gd_regularization_mu(double alpha, double epsilon, double R);
double re_agm_regularization_mu(double epsilon, double R);
double combined_regularization_mu(double epsilon, double R);

// Largest admissible alpha for the accelerated regularization theorem,
// (1/3) (eps / (12 L R^2))^beta, and for the combined theorem,
// (1/9) (eps / (2 L R^2))^tau.
double re_agm_regularization_alpha_cap(double L, double R, double epsilon, double beta);
double combined_alpha_cap(double L, double R, double epsilon, double tau);

}  // namespace ngl
