#pragma once

// Uniform frequency/time grids and the unitary discrete Fourier bridge
// between them.
//
// Frequencies are midpoints omega_i = omega_min + (i + 1/2) * d_omega, so no
// grid point ever touches omega = 0. The conjugate time grid has spacing
// d_t = 2 pi / (N d_omega) and points t_k = (k - N/2) d_t. With these choices
//
//     g(t_k) = d_omega / sqrt(2 pi) * sum_i f(omega_i) exp(-i omega_i t_k)
//
// is exactly unitary between the quadrature norms sum |f|^2 d_omega and
// sum |g|^2 d_t.

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <fftw3.h>

#include "eprtele/error.hpp"

namespace eprtele {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

class FrequencyGrid {
 public:
  FrequencyGrid(double omega_min, double delta_omega, int n_points)
      : omega_min_(omega_min), delta_omega_(delta_omega), n_points_(n_points) {
    if (!(omega_min >= 0.0)) {
      throw Error(ErrorCode::NegativeFrequency, "omega_min must be >= 0");
    }
    if (!(delta_omega > 0.0) || !std::isfinite(delta_omega)) {
      throw Error(ErrorCode::InvalidGrid, "delta_omega must be positive and finite");
    }
    if (n_points < 2) {
      throw Error(ErrorCode::InvalidGrid, "n_points must be >= 2");
    }
  }

  double omega_min() const noexcept { return omega_min_; }
  double omega_max() const noexcept { return omega_min_ + n_points_ * delta_omega_; }
  double delta_omega() const noexcept { return delta_omega_; }
  int size() const noexcept { return n_points_; }

  double point(int i) const noexcept { return omega_min_ + (i + 0.5) * delta_omega_; }

  std::vector<double> points() const {
    std::vector<double> out(static_cast<std::size_t>(n_points_));
    for (int i = 0; i < n_points_; ++i) out[static_cast<std::size_t>(i)] = point(i);
    return out;
  }

  bool operator==(const FrequencyGrid&) const = default;

 private:
  double omega_min_;
  double delta_omega_;
  int n_points_;
};

class TimeGrid {
 public:
  TimeGrid(int n_points, double delta_t) : n_points_(n_points), delta_t_(delta_t) {}

  int size() const noexcept { return n_points_; }
  double delta_t() const noexcept { return delta_t_; }
  double span() const noexcept { return n_points_ * delta_t_; }

  // Symmetric about zero for odd N; for even N the point t = 0 is index N/2.
  double point(int k) const noexcept { return (k - 0.5 * n_points_) * delta_t_; }

  std::vector<double> points() const {
    std::vector<double> out(static_cast<std::size_t>(n_points_));
    for (int k = 0; k < n_points_; ++k) out[static_cast<std::size_t>(k)] = point(k);
    return out;
  }

  bool operator==(const TimeGrid&) const = default;

 private:
  int n_points_;
  double delta_t_;
};

/// Midpoint grid with n_points cells covering [omega_min, omega_max].
inline FrequencyGrid make_frequency_grid(double omega_min, double omega_max, int n_points) {
  if (omega_min < 0.0) {
    throw Error(ErrorCode::NegativeFrequency, "frequencies live on (0, inf); omega_min < 0");
  }
  if (!(omega_max > omega_min)) {
    throw Error(ErrorCode::InvalidGrid, "omega_max must exceed omega_min");
  }
  if (n_points < 2) {
    throw Error(ErrorCode::InvalidGrid, "n_points must be >= 2");
  }
  return FrequencyGrid(omega_min, (omega_max - omega_min) / n_points, n_points);
}

inline TimeGrid conjugate_time_grid(const FrequencyGrid& g) {
  return TimeGrid(g.size(), kTwoPi / (g.size() * g.delta_omega()));
}

/// Quadrature inner product sum_i conj(a_i) b_i d_omega.
inline cplx inner_product(const CVector& a, const CVector& b, const FrequencyGrid& g) {
  if (a.size() != g.size() || b.size() != g.size()) {
    throw Error(ErrorCode::LengthMismatch, "vector length differs from grid size");
  }
  return a.dot(b) * g.delta_omega();
}

inline double squared_norm(const CVector& a, const FrequencyGrid& g) {
  if (a.size() != g.size()) {
    throw Error(ErrorCode::LengthMismatch, "vector length differs from grid size");
  }
  return a.squaredNorm() * g.delta_omega();
}

namespace detail {

enum class FftDirection { Forward, Backward };

// FFTW planning is not thread-safe; execution of an existing plan on fresh
// arrays is. Plans are made once per (length, direction) and kept for the
// process lifetime. FFTW_ESTIMATE keeps the chosen algorithm independent of
// timing, so repeated runs are bitwise identical.
inline fftw_plan fft_plan(int n, FftDirection dir) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, fftw_plan> plans;
  const std::lock_guard lock(mutex);
  const auto key = std::make_pair(n, dir == FftDirection::Forward ? 0 : 1);
  if (auto it = plans.find(key); it != plans.end()) return it->second;
  auto* in = fftw_alloc_complex(static_cast<std::size_t>(n));
  auto* out = fftw_alloc_complex(static_cast<std::size_t>(n));
  fftw_plan plan = fftw_plan_dft_1d(n, in, out, dir == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  plans.emplace(key, plan);
  return plan;
}

inline void fft(std::span<const cplx> in, std::span<cplx> out, FftDirection dir) {
  const fftw_plan plan = fft_plan(static_cast<int>(in.size()), dir);
  // FFTW does not write through the input pointer of an out-of-place plan.
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

/// Forward transform of every column of `in` (n rows, contiguous columns).
inline void fft_columns(const CMatrix& in, CMatrix& out) {
  static std::mutex mutex;
  static std::map<std::pair<Eigen::Index, Eigen::Index>, fftw_plan> plans;
  const int n = static_cast<int>(in.rows());
  const int howmany = static_cast<int>(in.cols());
  out.resize(in.rows(), in.cols());
  fftw_plan plan = nullptr;
  {
    const std::lock_guard lock(mutex);
    const auto key = std::make_pair(in.rows(), in.cols());
    if (auto it = plans.find(key); it != plans.end()) {
      plan = it->second;
    } else {
      const auto total = static_cast<std::size_t>(n) * static_cast<std::size_t>(howmany);
      auto* a = fftw_alloc_complex(total);
      auto* b = fftw_alloc_complex(total);
      plan = fftw_plan_many_dft(1, &n, howmany, a, nullptr, 1, n, b, nullptr, 1, n, FFTW_FORWARD,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
      fftw_free(a);
      fftw_free(b);
      plans.emplace(key, plan);
    }
  }
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace detail

/// out_k = sum_j samples_j exp(-i j d_omega t_k) for every point of the time
/// grid conjugate to `g`. `samples` may be shorter than the grid; it is
/// zero-padded. `scratch` and `out` must hold g.size() values.
inline void fourier_sum_unshifted(std::span<const cplx> samples, const FrequencyGrid& g,
                                  std::span<cplx> scratch, std::span<cplx> out) {
  const int n = g.size();
  if (static_cast<int>(samples.size()) > n || static_cast<int>(scratch.size()) != n ||
      static_cast<int>(out.size()) != n) {
    throw Error(ErrorCode::LengthMismatch, "fourier_sum buffer sizes do not match the grid");
  }
  // exp(-i j d_omega t_k) = exp(-2 pi i j k / N) * (-1)^j with t_k = (k - N/2) d_t.
  for (std::size_t j = 0; j < samples.size(); ++j) {
    scratch[j] = (j % 2 == 0) ? samples[j] : -samples[j];
  }
  for (std::size_t j = samples.size(); j < scratch.size(); ++j) scratch[j] = 0.0;
  detail::fft(scratch, out, detail::FftDirection::Forward);
}

/// exp(-i omega t_k) over the conjugate time grid.
inline CVector time_phases(double omega, const FrequencyGrid& g) {
  const TimeGrid tg = conjugate_time_grid(g);
  CVector out(g.size());
  for (int k = 0; k < g.size(); ++k) out[k] = std::polar(1.0, -omega * tg.point(k));
  return out;
}

/// out_k = sum_j samples_j exp(-i (first_omega + j d_omega) t_k).
inline void fourier_sum(std::span<const cplx> samples, double first_omega, const FrequencyGrid& g,
                        std::span<cplx> scratch, std::span<cplx> out) {
  fourier_sum_unshifted(samples, g, scratch, out);
  const CVector phases = time_phases(first_omega, g);
  for (int k = 0; k < g.size(); ++k) out[static_cast<std::size_t>(k)] *= phases[k];
}

/// Unitary image of a spectral amplitude on the conjugate time grid.
inline CVector to_time_domain(const CVector& spectral, const FrequencyGrid& g) {
  if (spectral.size() != g.size()) {
    throw Error(ErrorCode::LengthMismatch, "vector length differs from grid size");
  }
  const auto n = static_cast<std::size_t>(g.size());
  std::vector<cplx> scratch(n);
  CVector out(g.size());
  fourier_sum(std::span<const cplx>(spectral.data(), n), g.point(0), g, scratch,
              std::span<cplx>(out.data(), n));
  return out * (g.delta_omega() / std::sqrt(kTwoPi));
}

/// Inverse of to_time_domain.
inline CVector to_frequency_domain(const CVector& temporal, const FrequencyGrid& g) {
  if (temporal.size() != g.size()) {
    throw Error(ErrorCode::LengthMismatch, "vector length differs from grid size");
  }
  const int n = g.size();
  const TimeGrid tg = conjugate_time_grid(g);
  // f_i = sum_k v_k exp(i omega_0 t_k) exp(2 pi i i k / N) (-1)^i
  std::vector<cplx> in(static_cast<std::size_t>(n));
  std::vector<cplx> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    in[static_cast<std::size_t>(k)] = temporal[k] * std::polar(1.0, g.point(0) * tg.point(k));
  }
  detail::fft(in, out, detail::FftDirection::Backward);
  CVector result(n);
  const double scale = tg.delta_t() / std::sqrt(kTwoPi);
  for (int i = 0; i < n; ++i) {
    const cplx v = out[static_cast<std::size_t>(i)] * scale;
    result[i] = (i % 2 == 0) ? v : -v;
  }
  return result;
}

}  // namespace eprtele
