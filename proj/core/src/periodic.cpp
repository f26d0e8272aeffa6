#include "arrivallab/periodic.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace arrivallab {
namespace {

// One r2c/c2r pair per transform length. FFTW planning is not thread safe, so
// plans are created under a lock and executed through the new-array interface.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  PlanPair(const PlanPair&) = delete;
  PlanPair& operator=(const PlanPair&) = delete;

  explicit PlanPair(std::size_t n) {
    const int len = static_cast<int>(n);
    std::vector<double> real(n);
    std::vector<std::complex<double>> spec(n / 2 + 1);
    auto* spec_ptr = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward = fftw_plan_dft_r2c_1d(len, real.data(), spec_ptr, flags);
    backward = fftw_plan_dft_c2r_1d(len, spec_ptr, real.data(), flags);
  }

  // Only destroyed at process exit, when no planning can race.
  ~PlanPair() {
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }

  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
};

const PlanPair& plans_for(std::size_t n) {
  static std::map<std::size_t, std::unique_ptr<PlanPair>> cache;
  std::lock_guard lock(PlanPair::planner_mutex());
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<PlanPair>(n);
  return *slot;
}

struct Workspace {
  std::vector<double> real;
  std::vector<std::complex<double>> spec;
  std::vector<std::complex<double>> scratch;
};

Workspace& workspace(std::size_t n) {
  thread_local Workspace ws;
  if (ws.real.size() != n) {
    ws.real.assign(n, 0.0);
    ws.spec.assign(n / 2 + 1, {});
    ws.scratch.assign(n / 2 + 1, {});
  }
  return ws;
}

void forward_transform(std::size_t n, std::span<const double> f, std::vector<std::complex<double>>& out) {
  auto& ws = workspace(n);
  std::copy(f.begin(), f.end(), ws.real.begin());
  fftw_execute_dft_r2c(plans_for(n).forward, ws.real.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void backward_transform(std::size_t n, std::vector<std::complex<double>>& in, std::span<double> out) {
  auto& ws = workspace(n);
  fftw_execute_dft_c2r(plans_for(n).backward, reinterpret_cast<fftw_complex*>(in.data()),
                       ws.real.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = ws.real[j] * scale;
}

}  // namespace

DiffScheme parse_diff_scheme(std::string_view name) {
  if (name == "spectral") return DiffScheme::spectral;
  if (name == "fd4") return DiffScheme::fd4;
  throw std::invalid_argument("unknown differentiation scheme: " + std::string(name));
}

std::string_view to_string(DiffScheme scheme) {
  return scheme == DiffScheme::spectral ? "spectral" : "fd4";
}

PeriodicDifferentiator::PeriodicDifferentiator(std::size_t n, DiffScheme scheme)
    : n_(n), scheme_(scheme) {
  if (n < 8 || n % 2 != 0) {
    throw std::invalid_argument("periodic grid needs an even size >= 8");
  }
}

void PeriodicDifferentiator::derivatives(std::span<const double> f, std::span<double> d1,
                                         std::span<double> d2) const {
  if (f.size() != n_ || (!d1.empty() && d1.size() != n_) || (!d2.empty() && d2.size() != n_)) {
    throw std::invalid_argument("periodic derivative: size mismatch");
  }
  if (scheme_ == DiffScheme::spectral) {
    spectral(f, d1, d2);
  } else {
    finite_difference(f, d1, d2);
  }
}

std::vector<double> PeriodicDifferentiator::first(std::span<const double> f) const {
  std::vector<double> out(n_);
  derivatives(f, out, {});
  return out;
}

std::vector<double> PeriodicDifferentiator::second(std::span<const double> f) const {
  std::vector<double> out(n_);
  derivatives(f, {}, out);
  return out;
}

double PeriodicDifferentiator::second_derivative_spectral_radius() const {
  const double n = static_cast<double>(n_);
  if (scheme_ == DiffScheme::spectral) return 0.25 * n * n;
  const double dtheta = 2.0 * std::numbers::pi / n;
  return (16.0 / 3.0) / (dtheta * dtheta);
}

void PeriodicDifferentiator::spectral(std::span<const double> f, std::span<double> d1,
                                      std::span<double> d2) const {
  auto& ws = workspace(n_);
  forward_transform(n_, f, ws.spec);
  const std::size_t half = n_ / 2;

  if (!d1.empty()) {
    for (std::size_t k = 0; k < half; ++k) {
      ws.scratch[k] = std::complex<double>(0.0, static_cast<double>(k)) * ws.spec[k];
    }
    ws.scratch[half] = 0.0;
    backward_transform(n_, ws.scratch, d1);
  }
  if (!d2.empty()) {
    for (std::size_t k = 0; k <= half; ++k) {
      const double kk = static_cast<double>(k);
      ws.scratch[k] = -kk * kk * ws.spec[k];
    }
    backward_transform(n_, ws.scratch, d2);
  }
}

void PeriodicDifferentiator::finite_difference(std::span<const double> f, std::span<double> d1,
                                               std::span<double> d2) const {
  const std::size_t n = n_;
  const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(n);
  auto at = [&](std::size_t j, long offset) {
    const long idx = (static_cast<long>(j) + offset + static_cast<long>(n)) % static_cast<long>(n);
    return f[static_cast<std::size_t>(idx)];
  };
  for (std::size_t j = 0; j < n; ++j) {
    const double m2 = at(j, -2), m1 = at(j, -1), p1 = at(j, 1), p2 = at(j, 2);
    if (!d1.empty()) d1[j] = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * dtheta);
    if (!d2.empty()) {
      d2[j] = (-p2 + 16.0 * p1 - 30.0 * f[j] + 16.0 * m1 - m2) / (12.0 * dtheta * dtheta);
    }
  }
}

TrigInterpolant::TrigInterpolant(std::span<const double> samples) : n_(samples.size()) {
  if (n_ < 8 || n_ % 2 != 0) throw std::invalid_argument("trig interpolant needs an even size >= 8");
  std::vector<std::complex<double>> spec(n_ / 2 + 1);
  forward_transform(n_, samples, spec);
  const double inv_n = 1.0 / static_cast<double>(n_);
  const std::size_t half = n_ / 2;

  mean_ = spec[0].real() * inv_n;
  nyquist_ = spec[half].real() * inv_n;

  double scale = std::abs(mean_);
  for (std::size_t k = 1; k < half; ++k) scale = std::max(scale, 2.0 * std::abs(spec[k]) * inv_n);
  const double cutoff = 1e-15 * scale;

  std::size_t last = 0;
  for (std::size_t k = 1; k < half; ++k) {
    if (2.0 * std::abs(spec[k]) * inv_n > cutoff) last = k;
  }
  coeffs_.resize(last);
  for (std::size_t k = 1; k <= last; ++k) coeffs_[k - 1] = 2.0 * inv_n * spec[k];
  if (std::abs(nyquist_) <= cutoff) nyquist_ = 0.0;
}

TrigInterpolant::Value TrigInterpolant::eval(double theta) const {
  Value v{mean_, 0.0, 0.0};
  const std::complex<double> step = std::polar(1.0, theta);
  std::complex<double> phase = step;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    const std::complex<double> term = coeffs_[i] * phase;
    // Re(c e^{ik t}), d/dt -> Re(i k c e^{ikt}) = -k Im(c e^{ikt})
    v.f += term.real();
    v.df -= k * term.imag();
    v.d2f -= k * k * term.real();
    phase = ((i + 1) % 32 == 0) ? std::polar(1.0, (k + 1.0) * theta) : phase * step;
  }
  if (nyquist_ != 0.0) {
    const double k = 0.5 * static_cast<double>(n_);
    v.f += nyquist_ * std::cos(k * theta);
    v.df -= nyquist_ * k * std::sin(k * theta);
    v.d2f -= nyquist_ * k * k * std::cos(k * theta);
  }
  return v;
}

}  // namespace arrivallab
