#pragma once

#include <Eigen/Dense>

#include <span>

#include "ngl/errors.hpp"

namespace ngl {

// Dense vector in R^n. Dimension is fixed per problem instance.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Number of significand (fraction) bits p of a simulated floating-point
// format, 1 <= p <= 52. Machine epsilon is 2^-p.
class PrecisionSpec {
 public:
  explicit PrecisionSpec(int significand_bits);

  int significand_bits() const { return bits_; }
  double epsilon() const;

 private:
  int bits_;
};

// Compensated (Kahan) summation. Throws InvalidInput on non-finite values.
double kahan_sum(std::span<const double> values);

// Compensated dot product of elementwise products a_k * b_k.
double kahan_dot(const Vector& a, const Vector& b);

// Round to the nearest value with p fraction bits, ties to even.
// |result - x| <= 2^-p |x|; zero maps to zero.
double round_to_precision(double x, const PrecisionSpec& spec);

double norm1(const Vector& a);
double norm2(const Vector& a);
Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector scale(const Vector& a, double c);
// c * x + y
Vector axpy(double c, const Vector& x, const Vector& y);

void require_same_dim(const Vector& a, const Vector& b);
void require_finite(const Vector& a, const char* what);
bool all_finite(const Vector& a);

}  // namespace ngl
