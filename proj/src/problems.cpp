#include "ngl/problems.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ngl {

Problem::Problem(std::size_t dim, double mu, double L, std::string name)
    : dim_(dim), mu_(mu), L_(L), name_(std::move(name)) {
  if (dim == 0) throw InvalidInput("problem dimension must be at least 1");
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidInput("L must be positive and finite");
  if (!(mu >= 0.0) || mu > L) throw InvalidInput("mu must satisfy 0 <= mu <= L");
}

double Problem::condition_number() const {
  return mu_ > 0.0 ? L_ / mu_ : std::numeric_limits<double>::infinity();
}

double Problem::value(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw DimensionMismatch(dim_, static_cast<std::size_t>(x.size()));
  }
  return value_impl(x);
}

Vector Problem::gradient(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw DimensionMismatch(dim_, static_cast<std::size_t>(x.size()));
  }
  return gradient_impl(x);
}

void Problem::set_minimizer(Vector x_star) {
  x_star_ = std::move(x_star);
  f_star_ = value(x_star_);
}

namespace {

class NesterovConvex final : public Problem {
 public:
  NesterovConvex(int k, double L, int n)
      : Problem(static_cast<std::size_t>(n), 0.0, L,
                "nesterov_convex(k=" + std::to_string(k) + ",n=" + std::to_string(n) + ")"),
        k_(k) {
    Vector xs = Vector::Zero(n);
    for (int j = 1; j <= k; ++j) xs(j - 1) = 1.0 - static_cast<double>(j) / (k + 1);
    set_minimizer(std::move(xs));
  }

 private:
  double value_impl(const Vector& x) const override {
    double chain = x(0) * x(0) + x(k_ - 1) * x(k_ - 1);
    for (int j = 0; j + 1 < k_; ++j) {
      const double d = x(j) - x(j + 1);
      chain += d * d;
    }
    return L() / 8.0 * chain - L() / 4.0 * x(0);
  }

  Vector gradient_impl(const Vector& x) const override {
    Vector g = Vector::Zero(x.size());
    const double c = L() / 4.0;
    for (int j = 0; j < k_; ++j) {
      const double left = j > 0 ? x(j - 1) : 0.0;
      const double right = j + 1 < k_ ? x(j + 1) : 0.0;
      g(j) = c * (2.0 * x(j) - left - right);
    }
    g(0) -= c;
    return g;
  }

  int k_;
};

class NesterovStronglyConvex final : public Problem {
 public:
  NesterovStronglyConvex(double mu, double L, int n)
      : Problem(static_cast<std::size_t>(n), mu, L,
                "nesterov_strongly_convex(n=" + std::to_string(n) + ")"),
        c_(L - mu) {
    // Stationarity: (c/4 M + mu I) x = c/4 e_1, M = tridiag(-1, 2, -1) with
    // the last diagonal entry equal to 1.
    Vector diag = Vector::Constant(n, c_ / 2.0 + mu);
    diag(n - 1) = c_ / 4.0 + mu;
    Vector off = Vector::Constant(std::max(n - 1, 0), -c_ / 4.0);
    Vector rhs = Vector::Zero(n);
    rhs(0) = c_ / 4.0;
    set_minimizer(solve_tridiagonal(diag, off, rhs));
  }

 private:
  double value_impl(const Vector& x) const override {
    const Eigen::Index n = x.size();
    double chain = x(0) * x(0) - 2.0 * x(0);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
      const double d = x(j) - x(j + 1);
      chain += d * d;
    }
    return c_ / 8.0 * chain + mu() / 2.0 * x.squaredNorm();
  }

  Vector gradient_impl(const Vector& x) const override {
    const Eigen::Index n = x.size();
    Vector g(n);
    const double c = c_ / 4.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double left = j > 0 ? x(j - 1) : 0.0;
      const double mx = j + 1 < n ? 2.0 * x(j) - left - x(j + 1) : x(j) - left;
      g(j) = c * mx + mu() * x(j);
    }
    g(0) -= c;
    return g;
  }

  double c_;
};

}  // namespace

QuadraticProblem::CheckedMatrix::CheckedMatrix(Matrix m) : A(std::move(m)) {
  if (A.rows() != A.cols()) throw InvalidInput("quadratic: A must be square");
  if (A.rows() == 0) throw InvalidInput("quadratic: empty matrix");
  if (!A.allFinite()) throw InvalidInput("quadratic: non-finite entry in A");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidInput("quadratic: A is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A, Eigen::EigenvaluesOnly);
  lo = eig.eigenvalues().minCoeff();
  hi = eig.eigenvalues().maxCoeff();
  if (lo < -1e-12 * scale) throw InvalidInput("quadratic: A is not positive semi-definite");
  if (!(hi > 0.0)) throw InvalidInput("quadratic: A is zero");
  lo = std::max(lo, 0.0);
}

QuadraticProblem::QuadraticProblem(Matrix A, Vector b)
    : QuadraticProblem(CheckedMatrix(std::move(A)), std::move(b)) {}

QuadraticProblem::QuadraticProblem(CheckedMatrix checked, Vector b)
    : Problem(static_cast<std::size_t>(checked.A.rows()), checked.lo, checked.hi,
              "quadratic(n=" + std::to_string(checked.A.rows()) + ")"),
      A_(std::move(checked.A)),
      b_(std::move(b)) {
  if (b_.size() != A_.rows()) {
    throw DimensionMismatch(static_cast<std::size_t>(A_.rows()),
                            static_cast<std::size_t>(b_.size()));
  }
  require_finite(b_, "quadratic: b");
  Vector xs;
  if (mu() > 0.0) {
    xs = A_.ldlt().solve(-b_);
  } else {
    xs = A_.completeOrthogonalDecomposition().solve(-b_);
    const double resid = (A_ * xs + b_).norm();
    if (resid > 1e-9 * std::max(1.0, b_.norm())) {
      throw InvalidInput("quadratic: objective is unbounded below (b not in range of A)");
    }
  }
  set_minimizer(std::move(xs));
}

double QuadraticProblem::value_impl(const Vector& x) const {
  return 0.5 * x.dot(A_ * x) + b_.dot(x);
}

Vector QuadraticProblem::gradient_impl(const Vector& x) const { return A_ * x + b_; }

ProblemPtr nesterov_convex(int k, double L, int n) {
  if (n < 1) throw InvalidInput("nesterov_convex: n must be at least 1");
  if (k < 1 || k > n) throw InvalidInput("nesterov_convex: k must satisfy 1 <= k <= n");
  return std::make_shared<NesterovConvex>(k, L, n);
}

ProblemPtr nesterov_strongly_convex(double mu, double L, int n) {
  if (n < 1) throw InvalidInput("nesterov_strongly_convex: n must be at least 1");
  if (!(mu > 0.0)) throw InvalidInput("nesterov_strongly_convex: mu must be positive");
  if (!(mu < L)) throw InvalidInput("nesterov_strongly_convex: mu must be below L");
  return std::make_shared<NesterovStronglyConvex>(mu, L, n);
}

std::shared_ptr<const QuadraticProblem> quadratic(Matrix A, Vector b) {
  return std::make_shared<QuadraticProblem>(std::move(A), std::move(b));
}

Vector solve_tridiagonal(const Vector& diag, const Vector& off, const Vector& rhs) {
  const Eigen::Index n = diag.size();
  if (rhs.size() != n) {
    throw DimensionMismatch(static_cast<std::size_t>(n), static_cast<std::size_t>(rhs.size()));
  }
  if (n > 0 && off.size() != n - 1) {
    throw DimensionMismatch(static_cast<std::size_t>(n - 1),
                            static_cast<std::size_t>(off.size()));
  }
  Vector c(n), d(n), x(n);
  double pivot = diag(0);
  if (pivot == 0.0) throw InvalidInput("solve_tridiagonal: zero pivot");
  c(0) = n > 1 ? off(0) / pivot : 0.0;
  d(0) = rhs(0) / pivot;
  for (Eigen::Index i = 1; i < n; ++i) {
    pivot = diag(i) - off(i - 1) * c(i - 1);
    if (pivot == 0.0) throw InvalidInput("solve_tridiagonal: zero pivot");
    c(i) = i + 1 < n ? off(i) / pivot : 0.0;
    d(i) = (rhs(i) - off(i - 1) * d(i - 1)) / pivot;
  }
  x(n - 1) = d(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) x(i) = d(i) - c(i) * x(i + 1);
  return x;
}

}  // namespace ngl
