#include "ngl/numkit.hpp"

#include <cmath>
#include <string>

namespace ngl {

PrecisionSpec::PrecisionSpec(int significand_bits) : bits_(significand_bits) {
  if (significand_bits < 1 || significand_bits > 52) {
    throw InvalidInput("significand bits must lie in [1, 52], got " +
                       std::to_string(significand_bits));
  }
}

double PrecisionSpec::epsilon() const { return std::ldexp(1.0, -bits_); }

// Neumaier's variant of compensated summation: the correction term also
// absorbs the low part when the incoming value dominates the running sum,
// so cancellation patterns like {big, small, -big} are recovered exactly.
double kahan_sum(std::span<const double> values) {
  double sum = 0.0;
  double compensation = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput("kahan_sum: non-finite input");
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      compensation += (sum - t) + v;
    } else {
      compensation += (v - t) + sum;
    }
    sum = t;
  }
  return sum + compensation;
}

double kahan_dot(const Vector& a, const Vector& b) {
  require_same_dim(a, b);
  Vector products = a.cwiseProduct(b);
  return kahan_sum(std::span<const double>(products.data(),
                                           static_cast<std::size_t>(products.size())));
}

double round_to_precision(double x, const PrecisionSpec& spec) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);  // |mantissa| in [0.5, 1)
  const int kept = spec.significand_bits() + 1;      // implicit leading bit
  // nearbyint follows the default round-to-nearest-even mode.
  const double scaled = std::nearbyint(std::ldexp(mantissa, kept));
  return std::ldexp(scaled, exponent - kept);
}

double norm1(const Vector& a) { return a.lpNorm<1>(); }

double norm2(const Vector& a) { return a.norm(); }

void require_same_dim(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(static_cast<std::size_t>(a.size()),
                            static_cast<std::size_t>(b.size()));
  }
}

void require_finite(const Vector& a, const char* what) {
  if (!all_finite(a)) throw InvalidInput(std::string(what) + ": non-finite entry");
}

bool all_finite(const Vector& a) { return a.allFinite(); }

Vector add(const Vector& a, const Vector& b) {
  require_same_dim(a, b);
  return a + b;
}

Vector sub(const Vector& a, const Vector& b) {
  require_same_dim(a, b);
  return a - b;
}

Vector scale(const Vector& a, double c) { return c * a; }

Vector axpy(double c, const Vector& x, const Vector& y) {
  require_same_dim(x, y);
  return c * x + y;
}

}  // namespace ngl
