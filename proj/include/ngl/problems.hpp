#pragma once

#include <memory>
#include <string>

#include "ngl/numkit.hpp"

namespace ngl {

// A differentiable objective with known strong-convexity modulus mu, smoothness
// constant L, exact value and gradient, and a minimizer. Immutable after
// construction.
class Problem {
 public:
  virtual ~Problem() = default;

  std::size_t dim() const { return dim_; }
  double mu() const { return mu_; }
  double L() const { return L_; }
  double f_star() const { return f_star_; }
  const Vector& x_star() const { return x_star_; }
  const std::string& name() const { return name_; }
  // L / mu; infinite when mu = 0.
  double condition_number() const;

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

  // f(x) - f*.
  double gap(const Vector& x) const { return value(x) - f_star_; }

 protected:
  Problem(std::size_t dim, double mu, double L, std::string name);

  // Stores x* and evaluates f* = value(x*).
  void set_minimizer(Vector x_star);

  virtual double value_impl(const Vector& x) const = 0;
  virtual Vector gradient_impl(const Vector& x) const = 0;

 private:
  std::size_t dim_;
  double mu_;
  double L_;
  double f_star_ = 0.0;
  Vector x_star_;
  std::string name_;
};

using ProblemPtr = std::shared_ptr<const Problem>;

// 1/2 x^T A x + b^T x with A symmetric positive semi-definite.
class QuadraticProblem final : public Problem {
 public:
  QuadraticProblem(Matrix A, Vector b);

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }

 private:
  // Validates symmetry and semi-definiteness and records the extreme
  // eigenvalues before the base is constructed.
  struct CheckedMatrix {
    explicit CheckedMatrix(Matrix m);
    Matrix A;
    double lo = 0.0;
    double hi = 0.0;
  };
  QuadraticProblem(CheckedMatrix checked, Vector b);

  double value_impl(const Vector& x) const override;
  Vector gradient_impl(const Vector& x) const override;

  Matrix A_;
  Vector b_;
};

// L/8 (x_1^2 + sum_{j<k} (x_j - x_{j+1})^2 + x_k^2) - L/4 x_1 on R^n; mu = 0.
ProblemPtr nesterov_convex(int k, double L, int n);

// (L-mu)/8 (x_1^2 + sum_{j<n} (x_j - x_{j+1})^2 - 2 x_1) + mu/2 |x|^2.
ProblemPtr nesterov_strongly_convex(double mu, double L, int n);

std::shared_ptr<const QuadraticProblem> quadratic(Matrix A, Vector b);

// Solves a symmetric tridiagonal system by forward elimination. diag has size
// n, off has size n-1 (sub- and super-diagonal).
Vector solve_tridiagonal(const Vector& diag, const Vector& off, const Vector& rhs);

}  // namespace ngl
