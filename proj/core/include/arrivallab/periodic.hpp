#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace arrivallab {

/// Differentiation scheme for 2*pi-periodic samples on a uniform grid.
enum class DiffScheme {
  spectral,  ///< trigonometric interpolation (FFT)
  fd4,       ///< 4th-order central differences
};

DiffScheme parse_diff_scheme(std::string_view name);
std::string_view to_string(DiffScheme scheme);

/// Derivatives of periodic samples f(theta_j), theta_j = 2*pi*j/N.
///
/// The spectral route zeroes the Nyquist mode for odd derivatives and keeps it
/// for the second derivative, so d2 is the exact second derivative of the
/// trigonometric interpolant at the nodes. Stateless apart from N; plans are
/// cached process-wide and shared between instances.
class PeriodicDifferentiator {
 public:
  PeriodicDifferentiator(std::size_t n, DiffScheme scheme);

  std::size_t size() const { return n_; }
  DiffScheme scheme() const { return scheme_; }

  /// First and second derivative in one pass. Either output may be empty.
  void derivatives(std::span<const double> f, std::span<double> d1, std::span<double> d2) const;

  std::vector<double> first(std::span<const double> f) const;
  std::vector<double> second(std::span<const double> f) const;

  /// Largest |eigenvalue| of the discrete second-derivative operator; used by
  /// the flow solver's explicit stability bound.
  double second_derivative_spectral_radius() const;

 private:
  void spectral(std::span<const double> f, std::span<double> d1, std::span<double> d2) const;
  void finite_difference(std::span<const double> f, std::span<double> d1, std::span<double> d2) const;

  std::size_t n_;
  DiffScheme scheme_;
};

/// Trigonometric interpolant of periodic samples, evaluable at any angle.
/// Coefficients below a relative 1e-15 (FFT round-off level) are dropped, so smooth curves evaluate in
/// O(number of significant modes).
class TrigInterpolant {
 public:
  TrigInterpolant() = default;
  explicit TrigInterpolant(std::span<const double> samples);

  struct Value {
    double f = 0.0;
    double df = 0.0;
    double d2f = 0.0;
  };

  Value eval(double theta) const;
  double value(double theta) const { return eval(theta).f; }

  std::size_t sample_count() const { return n_; }
  std::size_t mode_count() const { return coeffs_.size(); }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double nyquist_ = 0.0;  // coefficient of cos(N theta / 2)
  std::vector<std::complex<double>> coeffs_;  // c_k for k = 1..K, already doubled
};

}  // namespace arrivallab
