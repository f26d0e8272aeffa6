#include "arrivallab/periodic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace arrivallab;

namespace {

std::vector<double> sample(std::size_t n, double (*f)(double)) {
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = f(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
  return v;
}

double f(double t) { return std::sin(3 * t) + 0.5 * std::cos(t); }
double df(double t) { return 3 * std::cos(3 * t) - 0.5 * std::sin(t); }
double d2f(double t) { return -9 * std::sin(3 * t) - 0.5 * std::cos(t); }
double smooth(double t) { return std::exp(std::sin(t)); }
double smooth_d1(double t) { return std::cos(t) * std::exp(std::sin(t)); }

double max_err(const std::vector<double>& got, std::size_t n, double (*ref)(double)) {
  const auto want = sample(n, ref);
  double e = 0;
  for (std::size_t j = 0; j < n; ++j) e = std::max(e, std::abs(got[j] - want[j]));
  return e;
}

}  // namespace

TEST(Periodic, SpectralIsExactOnTrigPolynomials) {
  const std::size_t n = 64;
  PeriodicDifferentiator d(n, DiffScheme::spectral);
  const auto v = sample(n, f);
  EXPECT_LT(max_err(d.first(v), n, df), 1e-12);
  EXPECT_LT(max_err(d.second(v), n, d2f), 1e-11);
}

TEST(Periodic, Fd4ConvergesAtFourthOrder) {
  double prev = 0;
  for (std::size_t n : {32, 64, 128}) {
    PeriodicDifferentiator d(n, DiffScheme::fd4);
    const double e = max_err(d.first(sample(n, smooth)), n, smooth_d1);
    if (prev > 0) {
      EXPECT_NEAR(std::log2(prev / e), 4.0, 0.3);
    }
    prev = e;
  }
}

TEST(Periodic, SecondDerivativeSpectralRadius) {
  const std::size_t n = 128;
  const double dt = 2 * std::numbers::pi / n;
  EXPECT_NEAR(PeriodicDifferentiator(n, DiffScheme::spectral).second_derivative_spectral_radius(), 64.0 * 64.0,
              1e-9);
  // FD4 symbol at the Nyquist mode: (30 + 32 + 2) / 12 / dt^2.
  EXPECT_NEAR(PeriodicDifferentiator(n, DiffScheme::fd4).second_derivative_spectral_radius(), 16.0 / 3.0 / (dt * dt),
              1e-6);
}

TEST(Periodic, InterpolantMatchesOffNode) {
  const std::size_t n = 32;
  TrigInterpolant p(sample(n, f));
  for (double t : {0.1, 1.3, 2.9, 5.5}) {
    const auto v = p.eval(t);
    EXPECT_NEAR(v.f, f(t), 1e-13);
    EXPECT_NEAR(v.df, df(t), 1e-12);
    EXPECT_NEAR(v.d2f, d2f(t), 1e-11);
  }
}

TEST(Periodic, SchemeNamesRoundTrip) {
  for (auto s : {DiffScheme::spectral, DiffScheme::fd4}) EXPECT_EQ(parse_diff_scheme(to_string(s)), s);
}
