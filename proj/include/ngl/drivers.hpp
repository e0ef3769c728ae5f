#pragma once

#include <memory>
#include <string>

#include "ngl/bounds.hpp"
#include "ngl/solvers.hpp"

namespace ngl {

// f_mu(x) = f(x) + mu/2 |x - center|^2. Its minimizer is computed on
// construction by an exact accelerated method.
class RegularizedProblem final : public Problem {
 public:
  RegularizedProblem(ProblemPtr base, Vector center, double mu_reg);

  const Problem& base() const { return *base_; }
  const Vector& center() const { return center_; }
  double mu_reg() const { return mu_reg_; }
  // |x*_mu - center|.
  double R_mu() const;

 private:
  double value_impl(const Vector& x) const override;
  Vector gradient_impl(const Vector& x) const override;

  ProblemPtr base_;
  Vector center_;
  double mu_reg_;
};

std::shared_ptr<const RegularizedProblem> regularize(ProblemPtr base, Vector center,
                                                     double mu_reg);

// g~_mu(x) = g~(x) + mu (x - center). For a base oracle with levels (a, d)
// the declared levels are (2a, a mu R + d), where R bounds |x* - center|.
class RegularizedOracle final : public GradientOracle {
 public:
  RegularizedOracle(std::shared_ptr<const RegularizedProblem> problem, OraclePtr base,
                    double R);

  double declared_alpha() const override;
  double declared_delta() const override;
  std::string kind() const override { return "regularized_" + base_->kind(); }

 private:
  Vector estimate_impl(const Vector& x, const Vector& grad, std::uint64_t query) const override;

  std::shared_ptr<const RegularizedProblem> reg_;
  OraclePtr base_;
  double R_;
};

enum class SolverKind { gd, re_agm, adaptive_gd };

SolverKind parse_solver(const std::string& text);
std::string to_string(SolverKind kind);

// Stop once |g~| <= ((1 + alpha) K + 1) delta, where alpha and delta are the
// oracle's levels. Requires K > 1/(1 - alpha).
struct StoppingRule {
  double K;
  double delta;
  double alpha = 0.0;

  StoppingRule(double K, double delta, double alpha = 0.0);
  double threshold() const;
  // Gap guaranteed on a rule-triggered exit for a mu-strongly convex target.
  double level(double mu) const;
};

// Error raised when a restart stage fails to halve the gap.
class StageFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

// Regularizes the convex base with mu = (2/3)((1-a)^3/(1+a)) eps / R^2 and
// runs gradient descent (configured with 2a, the regularized relative level)
// for the regularization budget. Rows report base-problem gaps. R must bound
// |x* - x0|; the oracle must be relative-only with a < 1/2.
RunTrace solve_convex_gd(const OraclePtr& oracle, double epsilon, double R,
                         const RunOptions& opts = {});

// Same with mu = eps / (6 R^2) and RE-AGM. Requires
// a <= (1/3)(eps / (12 L R^2))^beta. When 2a exceeds 1/3 the method runs
// with 1/3 and the trace carries a hypothesis warning.
RunTrace solve_convex_re_agm(const OraclePtr& oracle, double epsilon, double beta, double R,
                             const RunOptions& opts = {});

// Runs gd or re_agm configured with alpha_hat until the estimate norm falls
// to the rule threshold or n_cap steps elapse. RE-AGM monitors both x^k and
// y^k. The final point is the one that triggered the rule.
RunTrace run_with_stopping(SolverKind solver, const GradientOracle& oracle,
                           const StoppingRule& rule, double alpha_hat, std::int64_t n_cap,
                           const RunOptions& opts = {});

// Geometric restarts on a strongly convex problem: stage s must bring the gap
// from gap0 / 2^{s-1} to gap0 / 2^s within the budget obtained by inverting
// the solver's envelope. Stops early with floor_reached when a stage target
// lies below the envelope floor.
RunTrace restart_to_convex(SolverKind solver, const GradientOracle& oracle, double epsilon,
                           const RunOptions& opts = {});

// Regularization with mu = eps / (120 R^2) combined with the stopping rule
// K = 1/a and RE-AGM at alpha_hat = 3a. Requires 0 < a <= (1/9)(eps/2LR^2)^tau.
RunTrace combined_reg_stop(const OraclePtr& oracle, double epsilon, double tau, double R,
                           const RunOptions& opts = {});

}  // namespace ngl
