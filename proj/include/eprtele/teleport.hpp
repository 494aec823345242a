#pragma once

// Teleportation pipeline: condition photon 2 on an entangled-measurement
// outcome, undo the classically known mirror and phase, and score the result.

#include <cmath>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "eprtele/error.hpp"
#include "eprtele/grid.hpp"
#include "eprtele/parallel.hpp"
#include "eprtele/povm.hpp"
#include "eprtele/states.hpp"

namespace eprtele {

/// Which combination of pump frequency and Omega_- sets the mirror point of
/// the conditional state.
enum class MirrorConvention {
  PumpMinusOmegaMinus,       // omega_0 = Omega_0 - Omega_-
  PumpMinusTwiceOmegaMinus,  // omega_0 = Omega_0 - 2 Omega_-
};

inline constexpr MirrorConvention kDefaultMirrorConvention =
    MirrorConvention::PumpMinusTwiceOmegaMinus;

inline std::string_view to_string(MirrorConvention c) {
  return c == MirrorConvention::PumpMinusOmegaMinus ? "omega0_minus_omega_minus"
                                                    : "omega0_minus_2_omega_minus";
}

inline std::optional<MirrorConvention> parse_mirror_convention(std::string_view s) {
  if (s == "omega0_minus_omega_minus") return MirrorConvention::PumpMinusOmegaMinus;
  if (s == "omega0_minus_2_omega_minus") return MirrorConvention::PumpMinusTwiceOmegaMinus;
  return std::nullopt;
}

struct ReconstructionParams {
  double mirror_center = 0.0;  // rad/s
  double phase_time = 0.0;     // s
};

/// Built only from the broadcast (t, Omega_-) and the public pump frequency.
inline ReconstructionParams reconstruction_params(double t, double omega_minus, double omega0,
                                                  MirrorConvention c = kDefaultMirrorConvention) {
  const double shift = c == MirrorConvention::PumpMinusOmegaMinus ? omega_minus : 2.0 * omega_minus;
  return ReconstructionParams{omega0 - shift, t};
}

/// |<a|b>|^2 for normalized packets on the same grid.
inline double fidelity(const WavePacket& a, const WavePacket& b) {
  if (!(a.grid() == b.grid())) throw Error(ErrorCode::GridMismatch, "fidelity needs one grid");
  return std::norm(inner_product(a.amplitudes(), b.amplitudes(), a.grid()));
}

namespace detail {

/// Integer K with omega_j + omega_{K-j} = mirror_center, if the mirror lands
/// on grid points (to within 1e-9 d_omega).
inline std::optional<long> mirror_index_sum(const FrequencyGrid& g, double mirror_center) {
  const double s = (mirror_center - 2.0 * g.omega_min()) / g.delta_omega() - 1.0;
  const long k = std::lround(s);
  if (std::abs(s - static_cast<double>(k)) <= 1e-9) return k;
  return std::nullopt;
}

}  // namespace detail

struct Reconstruction {
  WavePacket state;
  bool interpolated = false;
};

/// h(omega) = exp(+i omega t) g(mirror_center - omega), normalized.
///
/// Off-lattice mirror points are handled by linear interpolation of the
/// demodulated amplitude exp(-i x t) g(x), and flagged.
inline Reconstruction reconstruction_map(const WavePacket& g, const ReconstructionParams& r) {
  const FrequencyGrid& grid = g.grid();
  const int n = grid.size();
  const double t = r.phase_time;
  CVector h = CVector::Zero(n);
  bool interpolated = false;
  if (const auto ksum = detail::mirror_index_sum(grid, r.mirror_center)) {
    for (int j = 0; j < n; ++j) {
      const long src = *ksum - j;
      if (src < 0 || src >= n) continue;
      h[j] = std::polar(1.0, grid.point(j) * t) * g[static_cast<int>(src)];
    }
  } else {
    interpolated = true;
    const cplx carrier = std::polar(1.0, r.mirror_center * t);
    for (int j = 0; j < n; ++j) {
      const double x = r.mirror_center - grid.point(j);
      const double u = (x - grid.omega_min()) / grid.delta_omega() - 0.5;
      const double lo = std::floor(u);
      const double frac = u - lo;
      const long i0 = static_cast<long>(lo);
      auto demod = [&](long i) -> cplx {
        if (i < 0 || i >= n) return 0.0;
        return std::polar(1.0, -grid.point(static_cast<int>(i)) * t) * g[static_cast<int>(i)];
      };
      h[j] = carrier * ((1.0 - frac) * demod(i0) + frac * demod(i0 + 1));
    }
  }
  return Reconstruction{normalize(h, grid), interpolated};
}

/// Reference conditional state of the ideal-correlation limit,
/// g(omega_2) ~ exp(+i omega_2 t) f(mirror_center - omega_2).
inline WavePacket ideal_limit_state(const WavePacket& f_in, double t, double omega_minus,
                                    double omega0, MirrorConvention c = kDefaultMirrorConvention) {
  const FrequencyGrid& grid = f_in.grid();
  const ReconstructionParams r = reconstruction_params(t, omega_minus, omega0, c);
  const auto ksum = detail::mirror_index_sum(grid, r.mirror_center);
  if (!ksum) {
    throw Error(ErrorCode::MirrorOffGrid, "mirror point does not map the grid onto itself");
  }
  const int n = grid.size();
  CVector g = CVector::Zero(n);
  double kept = 0.0;
  for (int j = 0; j < n; ++j) {
    const long src = *ksum - j;
    if (src < 0 || src >= n) continue;
    const cplx v = f_in[static_cast<int>(src)];
    kept += std::norm(v) * grid.delta_omega();
    g[j] = std::polar(1.0, grid.point(j) * t) * v;
  }
  if (1.0 - kept > kDefaultTailTolerance) {
    throw Error(ErrorCode::MirrorOffGrid,
                "mirror image loses input mass " + std::to_string(1.0 - kept));
  }
  return normalize(g, grid);
}

struct TeleportResult {
  MeasurementOutcome outcome;
  WavePacket conditional_state;
  double fidelity_raw = 0.0;
  double fidelity_corrected = 0.0;
  ReconstructionParams reconstruction;
  bool interpolated = false;
};

inline constexpr double kMinOutcomeDensity = 1e-300;

namespace detail {

inline double pump_frequency(const BiphotonAmplitude& F) {
  if (!F.omega0()) {
    throw Error(ErrorCode::MissingPumpFrequency, "joint amplitude carries no pump frequency");
  }
  return *F.omega0();
}

inline void require_teleport_grids(const BiphotonAmplitude& F, const WavePacket& f_in) {
  require_matched(F, f_in);
  if (!(F.grid2() == f_in.grid())) {
    throw Error(ErrorCode::GridMismatch, "photon 2 must share the input grid for scoring");
  }
}

}  // namespace detail

inline TeleportResult teleport_once(const BiphotonAmplitude& F, const WavePacket& f_in,
                                    const OutcomeGrid& og, OutcomeIndex o,
                                    MirrorConvention c = kDefaultMirrorConvention) {
  detail::require_teleport_grids(F, f_in);
  const double omega0 = detail::pump_frequency(F);
  const CVector psi = entangled_outcome_amplitude(F, f_in, og, o);
  const double density = density_from_amplitude(psi, F.grid2());
  const double t = og.time.point(o.k);
  const double omega_minus = og.omega_minus(o.d);
  if (!(density >= kMinOutcomeDensity)) {
    throw Error(ErrorCode::ZeroProbabilityOutcome, "outcome has zero probability density");
  }
  WavePacket state = normalize(psi, F.grid2());
  const ReconstructionParams r = reconstruction_params(t, omega_minus, omega0, c);
  const Reconstruction rec = reconstruction_map(state, r);
  const double raw = fidelity(f_in, state);
  const double corrected = fidelity(f_in, rec.state);
  return TeleportResult{MeasurementOutcome{t, omega_minus, density}, std::move(state), raw, corrected,
                        r, rec.interpolated};
}

inline TeleportResult teleport_once(const BiphotonAmplitude& F, const WavePacket& f_in,
                                    const OutcomeGrid& og, double t, double omega_minus,
                                    MirrorConvention c = kDefaultMirrorConvention) {
  return teleport_once(F, f_in, og, locate_outcome(og, t, omega_minus), c);
}

/// Densities and fidelities for every outcome of the grid. Matrices are
/// indexed (sector, k - k_begin).
struct OutcomeMap {
  OutcomeGrid grid;
  RMatrix density;
  RMatrix fidelity_raw;
  RMatrix fidelity_corrected;
  bool any_interpolated = false;

  double probability(int s, int col) const { return density(s, col) * grid.cell_measure(); }
  double total_probability() const { return eprtele::total_probability(density, grid); }

  OutcomeIndex index_of(int s, int col) const {
    return OutcomeIndex{col + grid.k_begin, grid.offset_of_sector(s)};
  }

  /// Highest-density outcome; ties resolve to the first in (sector, time) order.
  OutcomeIndex argmax() const {
    Eigen::Index best_s = 0;
    Eigen::Index best_c = 0;
    double best = -1.0;
    for (Eigen::Index s = 0; s < density.rows(); ++s) {
      for (Eigen::Index c = 0; c < density.cols(); ++c) {
        if (density(s, c) > best) {
          best = density(s, c);
          best_s = s;
          best_c = c;
        }
      }
    }
    return index_of(static_cast<int>(best_s), static_cast<int>(best_c));
  }
};

inline OutcomeMap evaluate_outcomes(const BiphotonAmplitude& F, const WavePacket& f_in,
                                    const OutcomeGrid& og,
                                    MirrorConvention c = kDefaultMirrorConvention, int workers = 0) {
  detail::require_teleport_grids(F, f_in);
  const double omega0 = detail::pump_frequency(F);
  const int ns = og.n_sectors();
  const int nt = og.n_times();
  OutcomeMap map{og, RMatrix::Zero(ns, nt), RMatrix::Zero(ns, nt), RMatrix::Zero(ns, nt), false};
  std::vector<char> interpolated(static_cast<std::size_t>(ns), 0);
  const int n = F.grid2().size();
  const double dw2 = F.grid2().delta_omega();
  const FrequencyGrid& g2 = F.grid2();
  // phase(k, j) = exp(+i omega_j t_k), shared by all sectors.
  CMatrix phase(og.time.size(), n);
  for (int k = 0; k < og.time.size(); ++k) {
    for (int j = 0; j < n; ++j) phase(k, j) = std::polar(1.0, g2.point(j) * og.time.point(k));
  }
  const CVector f_conj = f_in.amplitudes().conjugate();
  parallel_for(
      ns,
      [&](int s) {
        const int d = og.offset_of_sector(s);
        const CMatrix psi = sector_amplitudes(F, f_in, og, d);
        const ReconstructionParams r0 = reconstruction_params(0.0, og.omega_minus(d), omega0, c);
        const auto ksum = detail::mirror_index_sum(g2, r0.mirror_center);
        for (int k = og.k_begin; k < og.k_end; ++k) {
          const int col = k - og.k_begin;
          const double norm2 = psi.row(k).squaredNorm() * dw2;
          map.density(s, col) = norm2 * detail::kOutcomeDensityScale;
          if (!(map.density(s, col) >= kMinOutcomeDensity)) continue;
          map.fidelity_raw(s, col) = std::norm(f_conj.dot(psi.row(k).transpose().conjugate()) * dw2) / norm2;
          if (ksum) {
            // h_j = exp(i omega_j t) psi_{K - j}, scored without materializing h.
            cplx overlap = 0.0;
            double kept = 0.0;
            const long lo = std::max(0L, *ksum - (n - 1));
            const long hi = std::min(static_cast<long>(n) - 1, *ksum);
            for (long j = lo; j <= hi; ++j) {
              const cplx v = psi(k, static_cast<Eigen::Index>(*ksum - j));
              kept += std::norm(v);
              overlap += f_conj[j] * phase(k, j) * v;
            }
            map.fidelity_corrected(s, col) = kept > 0.0 ? std::norm(overlap) * dw2 / kept : 0.0;
          } else {
            const WavePacket state = normalize(psi.row(k).transpose(), g2);
            const Reconstruction rec = reconstruction_map(
                state, reconstruction_params(og.time.point(k), og.omega_minus(d), omega0, c));
            map.fidelity_corrected(s, col) = fidelity(f_in, rec.state);
            interpolated[static_cast<std::size_t>(s)] = 1;
          }
        }
      },
      workers);
  for (char flag : interpolated) map.any_interpolated = map.any_interpolated || flag != 0;
  return map;
}

struct AcceptanceWindow {
  double T = 0.0;  // s
  double W = 0.0;  // rad/s, extent in Omega_-
};

struct ChannelMetrics {
  double avg_fidelity_raw = 0.0;
  double avg_fidelity_corrected = 0.0;
  double efficiency = 0.0;
  OutcomeIndex window_origin;  // lowest (k, d) corner of the best window
};

/// Window extent in cells; throws WindowExceedsGrid when it does not fit.
inline std::pair<int, int> window_cells(const OutcomeGrid& og, const AcceptanceWindow& w) {
  if (!(w.T > 0.0) || !(w.W > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "acceptance window must have positive size");
  }
  const int nt = std::max(1, static_cast<int>(std::lround(w.T / og.time.delta_t())));
  const int nd = std::max(1, static_cast<int>(std::lround(w.W / og.delta_omega_minus())));
  if (nt > og.n_times() || nd > og.n_sectors()) {
    throw Error(ErrorCode::WindowExceedsGrid, "acceptance window larger than the outcome grid");
  }
  return {nt, nd};
}

/// Efficiency is the largest outcome probability captured by a T x W window
/// placed anywhere on the outcome grid; fidelities are probability-weighted
/// means over all outcomes.
inline ChannelMetrics channel_metrics(const OutcomeMap& map, const AcceptanceWindow& w) {
  const auto [nt, nd] = window_cells(map.grid, w);
  const Eigen::Index ns = map.density.rows();
  const Eigen::Index nc = map.density.cols();
  const double cell = map.grid.cell_measure();

  ChannelMetrics out;
  double total = 0.0;
  double raw = 0.0;
  double corrected = 0.0;
  for (Eigen::Index s = 0; s < ns; ++s) {
    for (Eigen::Index c = 0; c < nc; ++c) {
      const double p = map.density(s, c) * cell;
      total += p;
      raw += p * map.fidelity_raw(s, c);
      corrected += p * map.fidelity_corrected(s, c);
    }
  }
  out.avg_fidelity_raw = total > 0.0 ? raw / total : 0.0;
  out.avg_fidelity_corrected = total > 0.0 ? corrected / total : 0.0;

  // Summed-area table over (sector, time).
  RMatrix sat = RMatrix::Zero(ns + 1, nc + 1);
  for (Eigen::Index s = 0; s < ns; ++s) {
    for (Eigen::Index c = 0; c < nc; ++c) {
      sat(s + 1, c + 1) = map.density(s, c) * cell + sat(s, c + 1) + sat(s + 1, c) - sat(s, c);
    }
  }
  double best = -1.0;
  for (Eigen::Index s = 0; s + nd <= ns; ++s) {
    for (Eigen::Index c = 0; c + nt <= nc; ++c) {
      const double mass = sat(s + nd, c + nt) - sat(s, c + nt) - sat(s + nd, c) + sat(s, c);
      if (mass > best) {
        best = mass;
        out.window_origin = map.index_of(static_cast<int>(s), static_cast<int>(c));
      }
    }
  }
  out.efficiency = best;
  return out;
}

inline ChannelMetrics channel_metrics(const BiphotonAmplitude& F, const WavePacket& f_in,
                                      const OutcomeGrid& og, const AcceptanceWindow& w,
                                      MirrorConvention c = kDefaultMirrorConvention) {
  window_cells(og, w);
  return channel_metrics(evaluate_outcomes(F, f_in, og, c), w);
}

}  // namespace eprtele
