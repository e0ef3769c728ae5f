#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ngl/numkit.hpp"

using boost::multiprecision::cpp_rational;
using namespace ngl;

namespace {

cpp_rational exact_sum(const std::vector<double>& v) {
  cpp_rational s = 0;
  for (double x : v) s += cpp_rational(x);
  return s;
}

double abs_error(double computed, const cpp_rational& exact) {
  return std::abs(static_cast<double>(cpp_rational(computed) - exact));
}

double naive_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// Mixed magnitudes with heavy cancellation.
std::vector<double> adversarial_sequence(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-20, 20);
  std::vector<double> v;
  for (int i = 0; i < n; ++i) {
    const double x = std::ldexp(mant(rng), expo(rng));
    v.push_back(x);
    if (i % 3 == 0) v.push_back(-x * 0.999999);
  }
  return v;
}

}  // namespace

TEST(KahanSum, CancellationExample) {
  const std::vector<double> v{1e16, 1.0, -1e16};
  EXPECT_EQ(naive_sum(v), 0.0);
  EXPECT_EQ(static_cast<double>(exact_sum(v)), 1.0);
  EXPECT_EQ(kahan_sum(v), 1.0);
}

TEST(KahanSum, EmptyAndExact) {
  EXPECT_EQ(kahan_sum(std::vector<double>{}), 0.0);
  EXPECT_EQ(kahan_sum(std::vector<double>{1.0, 2.0, 3.0}), 6.0);
}

TEST(KahanSum, RejectsNonFinite) {
  EXPECT_THROW(kahan_sum(std::vector<double>{1.0, NAN}), InvalidInput);
  EXPECT_THROW(kahan_sum(std::vector<double>{INFINITY}), InvalidInput);
}

TEST(KahanSum, WithinBoundAndBeatsNaiveOnAdversarialSequences) {
  std::mt19937_64 rng(2024);
  const double eps = std::ldexp(1.0, -52);
  int not_worse = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto v = adversarial_sequence(rng, 50 + trial % 200);
    const cpp_rational exact = exact_sum(v);
    double abs_total = 0.0;
    for (double x : v) abs_total += std::abs(x);
    const double n = static_cast<double>(v.size());
    const double err = abs_error(kahan_sum(v), exact);
    ASSERT_LE(err, 4.0 * (eps + n * eps * eps) * abs_total) << "trial " << trial;
    if (err <= abs_error(naive_sum(v), exact)) ++not_worse;
  }
  EXPECT_GE(not_worse, 990);
}

TEST(KahanDot, SmallCases) {
  EXPECT_EQ(kahan_dot(Vector::Unit(2, 0), Vector::Unit(2, 1)), 0.0);
  Vector a(2), b(2);
  a << 2, 3;
  b << 4, 5;
  EXPECT_EQ(kahan_dot(a, b), 23.0);
}

TEST(KahanDot, NearCancellationAgainstExact) {
  Vector a(2), b(2);
  a << 1e8, 1;
  b << 1e8, -1;
  const cpp_rational exact = cpp_rational(1e16) - 1;
  const double got = kahan_dot(a, b);
  EXPECT_LE(abs_error(got, exact), 2.0 * std::ldexp(1.0, -52) * static_cast<double>(exact));
}

TEST(KahanDot, DimensionMismatch) {
  EXPECT_THROW(kahan_dot(Vector::Zero(2), Vector::Zero(3)), DimensionMismatch);
}

TEST(RoundToPrecision, Basics) {
  const PrecisionSpec p8(8);
  EXPECT_EQ(round_to_precision(0.0, p8), 0.0);
  EXPECT_EQ(round_to_precision(1.0, p8), 1.0);
  const double third = round_to_precision(1.0 / 3.0, p8);
  EXPECT_LE(std::abs(third - 1.0 / 3.0), std::ldexp(1.0, -8) / 3.0);
}

TEST(RoundToPrecision, MatchesBitLevelOracle) {
  // Independent oracle: scale the value so that p + 1 significant bits sit
  // left of the binary point, round half to even by hand, scale back.
  auto oracle = [](double x, int p) {
    if (x == 0.0) return 0.0;
    int e = 0;
    std::frexp(x, &e);
    const double scaled = std::ldexp(x, p + 1 - e);
    double fl = std::floor(scaled);
    const double frac = scaled - fl;
    if (frac > 0.5 || (frac == 0.5 && std::fmod(fl, 2.0) != 0.0)) fl += 1.0;
    return std::ldexp(fl, e - p - 1);
  };
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int p : {1, 4, 8, 10, 23, 40, 52}) {
    for (int i = 0; i < 500; ++i) {
      const double x = u(rng);
      ASSERT_EQ(round_to_precision(x, PrecisionSpec(p)), oracle(x, p)) << x << " p=" << p;
    }
  }
}

TEST(RoundToPrecision, IdempotentAndRelativeBound) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int p : {1, 3, 8, 20, 52}) {
    const PrecisionSpec spec(p);
    for (int i = 0; i < 2000; ++i) {
      const double x = std::ldexp(mant(rng), expo(rng));
      const double r = round_to_precision(x, spec);
      ASSERT_EQ(round_to_precision(r, spec), r);
      ASSERT_LE(std::abs(r - x), std::ldexp(1.0, -p) * std::abs(x));
    }
  }
}

TEST(PrecisionSpec, Range) {
  EXPECT_THROW(PrecisionSpec(0), InvalidInput);
  EXPECT_THROW(PrecisionSpec(53), InvalidInput);
  EXPECT_EQ(PrecisionSpec(10).epsilon(), std::ldexp(1.0, -10));
}

TEST(VectorOps, Basics) {
  Vector v(2);
  v << 3, 4;
  EXPECT_EQ(norm2(v), 5.0);
  EXPECT_EQ(norm1(v), 7.0);
  EXPECT_EQ(scale(v, 0.0), Vector::Zero(2));
  EXPECT_EQ(axpy(2.0, Vector::Ones(2), Vector::Constant(2, 3.0)), Vector::Constant(2, 5.0));
  EXPECT_EQ(add(v, v), 2.0 * v);
  EXPECT_EQ(sub(v, v), Vector::Zero(2));
  EXPECT_THROW(add(v, Vector::Zero(3)), DimensionMismatch);
  EXPECT_THROW(require_finite(Vector::Constant(2, NAN), "v"), InvalidInput);
}
