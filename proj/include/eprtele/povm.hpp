#pragma once

// Energy, time and entangled "energy+time" measurements as discrete identity
// resolutions.
//
// The entangled measurement acts on photon 1 (EPR partner kept by the sender)
// and photon 3 (the unknown input), both sampled on the same grid. A basis
// pair (i1, i3) has difference offset d = i1 - i3, giving
//
//     Omega_- = (omega_1 - omega_3) / 2 = d * d_omega / 2,
//     Omega_+ = (omega_1 + omega_3) / 2,
//
// and within the sector of fixed d the Omega_+ values step by d_omega. The
// outcome (t_k, d) has the rank-one element
//
//     M(k, d) = (d_t d_omega / 2 pi) |u><u|,  u = sum_{(i1,i3) in d} exp(i Omega_+ t_k) |i1, i3>
//
// in the orthonormal discrete basis. Summing over k gives the projector onto
// sector d (DFT unitarity), and the sectors partition the two-photon space,
// so the resolution is exactly complete.
//
// Densities are reported per d_t dOmega_- with dOmega_- = d_omega / 2. The
// continuum measure dt dOmega_- / 2 pi picks up the Jacobian
// d omega_1 d omega_3 = 2 dOmega_+ dOmega_-, hence the 1/pi below.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "eprtele/error.hpp"
#include "eprtele/grid.hpp"
#include "eprtele/parallel.hpp"
#include "eprtele/states.hpp"

namespace eprtele {

/// Set of (t, Omega_-) outcomes of the entangled measurement.
struct OutcomeGrid {
  FrequencyGrid grid;
  TimeGrid time;
  int k_begin = 0;  // first time index reported as an outcome
  int k_end = 0;    // one past the last

  int n_points() const noexcept { return grid.size(); }
  int n_sectors() const noexcept { return 2 * grid.size() - 1; }
  int n_times() const noexcept { return k_end - k_begin; }
  bool complete_in_time() const noexcept { return k_begin == 0 && k_end == time.size(); }

  int offset_of_sector(int s) const noexcept { return s - (grid.size() - 1); }
  int sector_of_offset(int d) const noexcept { return d + (grid.size() - 1); }

  double delta_omega_minus() const noexcept { return 0.5 * grid.delta_omega(); }
  double omega_minus(int d) const noexcept { return d * delta_omega_minus(); }
  double cell_measure() const noexcept { return time.delta_t() * delta_omega_minus(); }

  /// First photon-3 index in sector d; photon 1 is that index plus d.
  int sector_first_i3(int d) const noexcept { return d >= 0 ? 0 : -d; }
  int sector_length(int d) const noexcept { return grid.size() - (d >= 0 ? d : -d); }
  double sector_first_omega_plus(int d) const noexcept {
    const int i3 = sector_first_i3(d);
    return 0.5 * (grid.point(i3 + d) + grid.point(i3));
  }
};

/// Outcome grid over the full conjugate time grid, or over its central
/// `time_fraction` (used to plant an incomplete measurement).
inline OutcomeGrid make_outcome_grid(const FrequencyGrid& g, double time_fraction = 1.0) {
  if (!(time_fraction > 0.0 && time_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "time_fraction must lie in (0, 1]");
  }
  const TimeGrid tg = conjugate_time_grid(g);
  const int n = tg.size();
  const int count = std::max(1, static_cast<int>(std::lround(time_fraction * n)));
  const int begin = (n - count) / 2;
  return OutcomeGrid{g, tg, begin, begin + count};
}

struct OutcomeIndex {
  int k = 0;  // time index into the conjugate TimeGrid
  int d = 0;  // difference offset i1 - i3

  bool operator==(const OutcomeIndex&) const = default;
};

struct MeasurementOutcome {
  double t = 0.0;
  double omega_minus = 0.0;
  double probability_density = 0.0;
};

inline OutcomeIndex locate_outcome(const OutcomeGrid& og, double t, double omega_minus) {
  const double kf = t / og.time.delta_t() + 0.5 * og.time.size();
  const long k = std::lround(kf);
  const double df = omega_minus / og.delta_omega_minus();
  const long d = std::lround(df);
  constexpr double kSnap = 1e-9;
  if (std::abs(kf - static_cast<double>(k)) > kSnap || k < og.k_begin || k >= og.k_end) {
    throw Error(ErrorCode::OffGridOutcome, "t = " + std::to_string(t) + " is not an outcome time");
  }
  if (std::abs(df - static_cast<double>(d)) > kSnap || std::abs(d) >= og.n_points()) {
    throw Error(ErrorCode::OffGridOutcome,
                "Omega_- = " + std::to_string(omega_minus) + " is not an outcome offset");
  }
  return OutcomeIndex{static_cast<int>(k), static_cast<int>(d)};
}

// ---------------------------------------------------------------------------
// Single-photon and pair measurements.

/// |f(omega_i)|^2; sums to 1 with weight d_omega.
inline RVector energy_distribution(const WavePacket& f) { return f.amplitudes().cwiseAbs2(); }

/// |f~(t_k)|^2 for the unitary time image; sums to 1 with weight d_t.
inline RVector time_distribution(const WavePacket& f) {
  return to_time_domain(f.amplitudes(), f.grid()).cwiseAbs2();
}

inline RMatrix joint_energy_distribution(const BiphotonAmplitude& F) {
  return F.values().cwiseAbs2();
}

inline RMatrix joint_time_distribution(const BiphotonAmplitude& F) {
  return time_domain_amplitude(F).cwiseAbs2();
}

// ---------------------------------------------------------------------------
// Entangled measurement.

namespace detail {

inline void require_matched(const BiphotonAmplitude& F, const WavePacket& f) {
  if (!(F.grid1() == f.grid())) {
    throw Error(ErrorCode::GridMismatch, "photon 1 and photon 3 must share one grid");
  }
}

// 1/2pi of the continuum element times the Jacobian 2 (see header comment).
inline constexpr double kOutcomeDensityScale = 1.0 / std::numbers::pi;

}  // namespace detail

/// Unnormalized photon-2 amplitude after outcome (t, Omega_-):
///
///   psi(omega_2) = sum_{Omega_+} exp(-i Omega_+ t) F(Omega_+ + Omega_-, omega_2)
///                                f(Omega_+ - Omega_-) d_omega,
///
/// summed directly over the sector (no FFT).
inline CVector entangled_outcome_amplitude(const BiphotonAmplitude& F, const WavePacket& f,
                                           const OutcomeGrid& og, OutcomeIndex o) {
  detail::require_matched(F, f);
  if (!(og.grid == f.grid())) throw Error(ErrorCode::GridMismatch, "outcome grid differs");
  const double t = og.time.point(o.k);
  const double dw = og.grid.delta_omega();
  const int i3_first = og.sector_first_i3(o.d);
  const int len = og.sector_length(o.d);
  CVector psi = CVector::Zero(F.grid2().size());
  for (int j = 0; j < len; ++j) {
    const int i3 = i3_first + j;
    const int i1 = i3 + o.d;
    const double omega_plus = 0.5 * (og.grid.point(i1) + og.grid.point(i3));
    const cplx weight = std::polar(dw, -omega_plus * t) * f[i3];
    psi += weight * F.values().row(i1).transpose();
  }
  return psi;
}

inline CVector entangled_outcome_amplitude(const BiphotonAmplitude& F, const WavePacket& f,
                                           const OutcomeGrid& og, double t, double omega_minus) {
  return entangled_outcome_amplitude(F, f, og, locate_outcome(og, t, omega_minus));
}

/// Density per (d_t dOmega_-) of outcome o.
inline double outcome_density(const BiphotonAmplitude& F, const WavePacket& f, const OutcomeGrid& og,
                              OutcomeIndex o) {
  const CVector psi = entangled_outcome_amplitude(F, f, og, o);
  return psi.squaredNorm() * F.grid2().delta_omega() * detail::kOutcomeDensityScale;
}

inline double outcome_density(const BiphotonAmplitude& F, const WavePacket& f, const OutcomeGrid& og,
                              double t, double omega_minus) {
  return outcome_density(F, f, og, locate_outcome(og, t, omega_minus));
}

inline double density_from_amplitude(const CVector& psi, const FrequencyGrid& g2) {
  return psi.squaredNorm() * g2.delta_omega() * detail::kOutcomeDensityScale;
}

/// Photon-2 amplitudes for every time index of sector d at once. Row k holds
/// psi for t_k (full TimeGrid, k in [0, N)).
inline CMatrix sector_amplitudes(const BiphotonAmplitude& F, const WavePacket& f,
                                 const OutcomeGrid& og, int d) {
  detail::require_matched(F, f);
  const int n = og.n_points();
  const int n2 = F.grid2().size();
  const int i3_first = og.sector_first_i3(d);
  const int len = og.sector_length(d);
  const double dw = og.grid.delta_omega();
  const double first_plus = og.sector_first_omega_plus(d);
  // Column i2 holds the sector samples (times (-1)^j), zero-padded to n, so
  // one batched FFT gives sum_j samples_j exp(-i j d_omega t_k) for all k.
  CMatrix samples = CMatrix::Zero(n, n2);
  for (int i2 = 0; i2 < n2; ++i2) {
    for (int j = 0; j < len; ++j) {
      const int i3 = i3_first + j;
      const cplx v = F.values()(i3 + d, i2) * f[i3] * dw;
      samples(j, i2) = (j % 2 == 0) ? v : -v;
    }
  }
  CMatrix out;
  detail::fft_columns(samples, out);
  out.array().colwise() *= time_phases(first_plus, og.grid).array();
  return out;
}

/// Outcome densities over the whole outcome grid: rows are sectors (d from
/// -(N-1) to N-1), columns are time indices k_begin..k_end-1.
inline RMatrix outcome_density_map(const BiphotonAmplitude& F, const WavePacket& f,
                                   const OutcomeGrid& og, int workers = 0) {
  RMatrix density(og.n_sectors(), og.n_times());
  parallel_for(
      og.n_sectors(),
      [&](int s) {
        const int d = og.offset_of_sector(s);
        const CMatrix psi = sector_amplitudes(F, f, og, d);
        for (int k = og.k_begin; k < og.k_end; ++k) {
          density(s, k - og.k_begin) =
              psi.row(k).squaredNorm() * F.grid2().delta_omega() * detail::kOutcomeDensityScale;
        }
      },
      workers);
  return density;
}

/// Sum of density * d_t * dOmega_- over all outcomes, in fixed sector order.
inline double total_probability(const RMatrix& density, const OutcomeGrid& og) {
  double total = 0.0;
  for (Eigen::Index s = 0; s < density.rows(); ++s) {
    double row = 0.0;
    for (Eigen::Index k = 0; k < density.cols(); ++k) row += density(s, k);
    total += row;
  }
  return total * og.cell_measure();
}

// ---------------------------------------------------------------------------
// Completeness. Two-photon basis index a = i1 * N + i3.

inline constexpr int kMaxDenseCompletenessPoints = 32;

inline double entangled_element_weight(const OutcomeGrid& og) {
  return og.time.delta_t() * og.grid.delta_omega() / kTwoPi;
}

/// Dense N^2 x N^2 matrix of one entangled POVM element.
inline CMatrix entangled_povm_element(const OutcomeGrid& og, OutcomeIndex o) {
  const int n = og.n_points();
  CVector u = CVector::Zero(n * n);
  const double t = og.time.point(o.k);
  const int i3_first = og.sector_first_i3(o.d);
  for (int j = 0; j < og.sector_length(o.d); ++j) {
    const int i3 = i3_first + j;
    const int i1 = i3 + o.d;
    u[i1 * n + i3] = std::polar(1.0, 0.5 * (og.grid.point(i1) + og.grid.point(i3)) * t);
  }
  return entangled_element_weight(og) * (u * u.adjoint());
}

/// Dense sum of all entangled POVM elements of the outcome grid.
inline CMatrix dense_entangled_povm_sum(const OutcomeGrid& og) {
  const int n = og.n_points();
  if (n > kMaxDenseCompletenessPoints) {
    throw Error(ErrorCode::InvalidParameter, "dense completeness limited to n_points <= 32");
  }
  const double w = entangled_element_weight(og);
  CMatrix sum = CMatrix::Zero(n * n, n * n);
  std::vector<int> index;
  std::vector<cplx> u;
  for (int d = -(n - 1); d <= n - 1; ++d) {
    const int len = og.sector_length(d);
    const int i3_first = og.sector_first_i3(d);
    index.resize(static_cast<std::size_t>(len));
    u.resize(static_cast<std::size_t>(len));
    for (int k = og.k_begin; k < og.k_end; ++k) {
      const double t = og.time.point(k);
      for (int j = 0; j < len; ++j) {
        const int i3 = i3_first + j;
        const int i1 = i3 + d;
        index[static_cast<std::size_t>(j)] = i1 * n + i3;
        u[static_cast<std::size_t>(j)] =
            std::polar(1.0, 0.5 * (og.grid.point(i1) + og.grid.point(i3)) * t);
      }
      for (int a = 0; a < len; ++a) {
        for (int b = 0; b < len; ++b) {
          sum(index[static_cast<std::size_t>(a)], index[static_cast<std::size_t>(b)]) +=
              w * u[static_cast<std::size_t>(a)] * std::conj(u[static_cast<std::size_t>(b)]);
        }
      }
    }
  }
  return sum;
}

/// Spectral norm of a Hermitian matrix.
inline double hermitian_operator_norm(const CMatrix& h) {
  const Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

inline double dense_completeness_residual(const OutcomeGrid& og) {
  const int n = og.n_points();
  CMatrix residual = dense_entangled_povm_sum(og);
  residual -= CMatrix::Identity(n * n, n * n);
  return hermitian_operator_norm(residual);
}

/// Deterministic complex test vector, components uniform in [-0.5, 0.5) (fixed-seed mt19937_64).
inline CVector probe_vector(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5; };
  CVector v(size);
  for (int i = 0; i < size; ++i) v[i] = cplx(uniform(), uniform());
  return v;
}

/// ||sum_o M_o v - v|| / ||v|| for a fixed pseudo-random v on the two-photon
/// space. Matrix-free, so usable on large grids.
inline double probe_completeness_residual(const OutcomeGrid& og, std::uint64_t seed = 20260101) {
  const int n = og.n_points();
  const CVector v = probe_vector(n * n, seed);
  CVector mv = CVector::Zero(n * n);
  const double w = entangled_element_weight(og);
  for (int d = -(n - 1); d <= n - 1; ++d) {
    const int len = og.sector_length(d);
    const int i3_first = og.sector_first_i3(d);
    for (int k = og.k_begin; k < og.k_end; ++k) {
      const double t = og.time.point(k);
      // Omega_+ steps by d_omega along the sector; the phase is advanced by
      // recurrence, re-anchored every 32 steps.
      const double first = og.sector_first_omega_plus(d);
      const cplx step = std::polar(1.0, og.grid.delta_omega() * t);
      cplx proj = 0.0;
      cplx ph = 1.0;
      for (int j = 0; j < len; ++j) {
        if (j % 32 == 0) ph = std::polar(1.0, (first + j * og.grid.delta_omega()) * t);
        const int i1 = i3_first + j + d;
        proj += std::conj(ph) * v[i1 * n + i3_first + j];
        ph *= step;
      }
      proj *= w;
      for (int j = 0; j < len; ++j) {
        if (j % 32 == 0) ph = std::polar(1.0, (first + j * og.grid.delta_omega()) * t);
        const int i1 = i3_first + j + d;
        mv[i1 * n + i3_first + j] += ph * proj;
        ph *= step;
      }
    }
  }
  return (mv - v).norm() / v.norm();
}

/// Dense operator-norm residual for small grids, probe residual otherwise.
inline double completeness_residual(const OutcomeGrid& og) {
  return og.n_points() <= kMaxDenseCompletenessPoints ? dense_completeness_residual(og)
                                                      : probe_completeness_residual(og);
}

/// Residual of the energy resolution sum_i |i><i| = I.
inline double energy_povm_residual(const FrequencyGrid& g) {
  CMatrix sum = CMatrix::Zero(g.size(), g.size());
  for (int i = 0; i < g.size(); ++i) sum(i, i) += 1.0;
  return (sum - CMatrix::Identity(g.size(), g.size())).cwiseAbs().maxCoeff();
}

/// Operator-norm residual of the discrete time resolution
/// sum_k (d_t d_omega / 2 pi) |e_k><e_k| = I, e_k = sum_i exp(i omega_i t_k) |i>.
inline double time_povm_residual(const FrequencyGrid& g) {
  const TimeGrid tg = conjugate_time_grid(g);
  const int n = g.size();
  const double w = tg.delta_t() * g.delta_omega() / kTwoPi;
  CMatrix sum = CMatrix::Zero(n, n);
  CVector e(n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) e[i] = std::polar(1.0, g.point(i) * tg.point(k));
    sum += w * (e * e.adjoint());
  }
  return hermitian_operator_norm(sum - CMatrix::Identity(n, n));
}

}  // namespace eprtele
