#pragma once

// Single-photon wave packets and the Gaussian energy-time entangled biphoton
// amplitude, sampled on frequency grids.

#include <cmath>
#include <optional>
#include <utility>

#include "eprtele/error.hpp"
#include "eprtele/grid.hpp"

namespace eprtele {

/// Normalized spectral amplitude f(omega) of one photon. Any emission-time
/// offset is already folded into the phases.
class WavePacket {
 public:
  const FrequencyGrid& grid() const noexcept { return grid_; }
  const CVector& amplitudes() const noexcept { return amplitudes_; }
  cplx operator[](int i) const { return amplitudes_[i]; }
  int size() const noexcept { return grid_.size(); }

 private:
  WavePacket(FrequencyGrid grid, CVector amplitudes)
      : grid_(std::move(grid)), amplitudes_(std::move(amplitudes)) {}

  friend WavePacket normalize(const CVector& f, const FrequencyGrid& g);

  FrequencyGrid grid_;
  CVector amplitudes_;
};

inline WavePacket normalize(const CVector& f, const FrequencyGrid& g) {
  const double norm2 = squared_norm(f, g);
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
    throw Error(ErrorCode::ZeroVector, "cannot normalize a zero (or non-finite) amplitude");
  }
  return WavePacket(g, f / std::sqrt(norm2));
}

/// Probability mass of N(center, stddev^2) outside [lo, hi].
inline double gaussian_tail_mass(double center, double stddev, double lo, double hi) {
  const double s = stddev * std::numbers::sqrt2;
  return 0.5 * std::erfc((center - lo) / s) + 0.5 * std::erfc((hi - center) / s);
}

/// Spectral mass of a Gaussian packet (|f|^2 has standard deviation `width`)
/// that falls outside the grid.
inline double packet_tail_mass(double center, double width, const FrequencyGrid& g) {
  return gaussian_tail_mass(center, width, g.omega_min(), g.omega_max());
}

inline constexpr double kDefaultTailTolerance = 1e-8;

/// f(omega) ~ exp(-(omega - center)^2 / (4 width^2)) exp(-i omega t0), normalized
/// on the grid. `width` is the standard deviation of |f|^2.
inline WavePacket gaussian_packet(double center, double width, double t0, const FrequencyGrid& g,
                                  double tail_tolerance = kDefaultTailTolerance) {
  if (!(width > 0.0)) throw Error(ErrorCode::InvalidParameter, "packet width must be positive");
  if (!(center > g.omega_min() && center < g.omega_max())) {
    throw Error(ErrorCode::MassOutsideGrid, "packet center lies outside the grid interior");
  }
  const double tail = packet_tail_mass(center, width, g);
  if (tail > tail_tolerance) {
    throw Error(ErrorCode::MassOutsideGrid,
                "packet spectral mass outside grid is " + std::to_string(tail));
  }
  CVector f(g.size());
  for (int i = 0; i < g.size(); ++i) {
    const double w = g.point(i);
    const double x = (w - center) / width;
    f[i] = std::exp(-0.25 * x * x) * std::polar(1.0, -w * t0);
  }
  return normalize(f, g);
}

struct GaussianEPRParams {
  double mu = 0.0;
  double sigma = 1.0;
  double omega1_center = 1.0;
  double omega2_center = 1.0;

  /// Pump frequency; the sum of the two marginal centers.
  double omega0() const noexcept { return omega1_center + omega2_center; }

  /// sigma^2 (1 - mu^2); zero in the ideal-correlation limit.
  double ideality() const noexcept { return sigma * sigma * (1.0 - mu * mu); }

  void validate() const {
    if (!(std::abs(mu) < 1.0)) {
      throw Error(ErrorCode::DegenerateCorrelation, "|mu| must be strictly below 1");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw Error(ErrorCode::InvalidParameter, "sigma must be positive");
    }
    if (!(omega1_center > 0.0) || !(omega2_center > 0.0)) {
      throw Error(ErrorCode::InvalidParameter, "marginal centers must be positive");
    }
  }
};

/// Upper bound on the |F|^2 mass outside grid1 x grid2 (union of the two
/// marginal tails; each marginal of |F|^2 is N(center, sigma^2)).
inline double epr_tail_mass(const GaussianEPRParams& p, const FrequencyGrid& g1,
                            const FrequencyGrid& g2) {
  return packet_tail_mass(p.omega1_center, p.sigma, g1) +
         packet_tail_mass(p.omega2_center, p.sigma, g2);
}

/// Joint amplitude F(omega, omega') of the photon pair. Rows index photon 1
/// (grid1), columns photon 2 (grid2).
class BiphotonAmplitude {
 public:
  /// Wraps raw values and renormalizes them on the discrete grids.
  static BiphotonAmplitude from_values(CMatrix values, FrequencyGrid g1, FrequencyGrid g2,
                                       std::optional<double> omega0 = std::nullopt) {
    if (values.rows() != g1.size() || values.cols() != g2.size()) {
      throw Error(ErrorCode::LengthMismatch, "amplitude shape does not match the grids");
    }
    const double norm2 = values.squaredNorm() * g1.delta_omega() * g2.delta_omega();
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
      throw Error(ErrorCode::ZeroVector, "joint amplitude is zero");
    }
    BiphotonAmplitude out(std::move(values), std::move(g1), std::move(g2));
    out.values_ /= std::sqrt(norm2);
    out.norm_correction_ = 1.0 / std::sqrt(norm2);
    out.omega0_ = omega0;
    return out;
  }

  const CMatrix& values() const noexcept { return values_; }
  const FrequencyGrid& grid1() const noexcept { return grid1_; }
  const FrequencyGrid& grid2() const noexcept { return grid2_; }
  const std::optional<GaussianEPRParams>& params() const noexcept { return params_; }
  std::optional<double> omega0() const noexcept { return omega0_; }

  /// Factor applied to the sampled values to reach unit discrete norm.
  double norm_correction() const noexcept { return norm_correction_; }

 private:
  BiphotonAmplitude(CMatrix values, FrequencyGrid g1, FrequencyGrid g2)
      : values_(std::move(values)), grid1_(std::move(g1)), grid2_(std::move(g2)) {}

  friend BiphotonAmplitude gaussian_epr_amplitude(const GaussianEPRParams&, const FrequencyGrid&,
                                                  const FrequencyGrid&, double);

  CMatrix values_;
  FrequencyGrid grid1_;
  FrequencyGrid grid2_;
  std::optional<GaussianEPRParams> params_;
  std::optional<double> omega0_;
  double norm_correction_ = 1.0;
};

/// Correlated Gaussian joint amplitude
///
///   F = exp(-P/2) / sqrt(2 pi sigma^2 sqrt(1 - mu^2)),
///   P = [x^2 + y^2 - 2 mu x y] / (2 sigma^2 (1 - mu^2)),
///
/// with x = omega - Omega1, y = omega' - Omega2, renormalized on the grids.
inline BiphotonAmplitude gaussian_epr_amplitude(const GaussianEPRParams& p, const FrequencyGrid& g1,
                                                const FrequencyGrid& g2,
                                                double tail_tolerance = kDefaultTailTolerance) {
  p.validate();
  const double tail = epr_tail_mass(p, g1, g2);
  if (tail > tail_tolerance) {
    throw Error(ErrorCode::MassOutsideGrid,
                "joint spectral mass outside grid is " + std::to_string(tail));
  }
  const double one_minus_mu2 = 1.0 - p.mu * p.mu;
  const double denom = 2.0 * p.sigma * p.sigma * one_minus_mu2;
  const double prefactor = 1.0 / std::sqrt(kTwoPi * p.sigma * p.sigma * std::sqrt(one_minus_mu2));
  CMatrix values(g1.size(), g2.size());
  for (int j = 0; j < g2.size(); ++j) {
    const double y = g2.point(j) - p.omega2_center;
    for (int i = 0; i < g1.size(); ++i) {
      const double x = g1.point(i) - p.omega1_center;
      const double P = (x * x + y * y - 2.0 * p.mu * x * y) / denom;
      values(i, j) = prefactor * std::exp(-0.5 * P);
    }
  }
  BiphotonAmplitude out(std::move(values), g1, g2);
  const double norm2 = out.values_.squaredNorm() * g1.delta_omega() * g2.delta_omega();
  out.values_ /= std::sqrt(norm2);
  out.norm_correction_ = 1.0 / std::sqrt(norm2);
  out.params_ = p;
  out.omega0_ = p.omega0();
  return out;
}

/// F(t1, t2) = (1/2pi) sum F(omega, omega') exp(-i(omega t1 + omega' t2)) d_omega d_omega',
/// on the two conjugate time grids. Unitary.
inline CMatrix time_domain_amplitude(const BiphotonAmplitude& F) {
  const CMatrix& v = F.values();
  CMatrix half(v.rows(), v.cols());
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    half.col(j) = to_time_domain(v.col(j), F.grid1());
  }
  CMatrix out(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    out.row(i) = to_time_domain(half.row(i).transpose(), F.grid2()).transpose();
  }
  return out;
}

}  // namespace eprtele
