#pragma once

// Small-grid density-matrix evaluation of the conditional state of photon 2:
// the full three-photon state rho_EPR(1,2) x rho(3) is contracted with a dense
// POVM element and partially traced over photons 1 and 3. Independent of the
// pure-state fast path in povm.hpp/teleport.hpp, which it cross-checks.

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "eprtele/error.hpp"
#include "eprtele/povm.hpp"
#include "eprtele/states.hpp"

namespace eprtele {

inline constexpr int kMaxDenseOraclePoints = 16;

/// 1/2 sum |eigenvalues(a - b)| for Hermitian a, b.
inline double trace_distance(const CMatrix& a, const CMatrix& b) {
  const Eigen::SelfAdjointEigenSolver<CMatrix> solver(a - b, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

/// Pair amplitudes in the orthonormal discrete basis, c(i1, i2) = F sqrt(dw1 dw2).
inline CMatrix discrete_pair_amplitudes(const BiphotonAmplitude& F) {
  return F.values() * std::sqrt(F.grid1().delta_omega() * F.grid2().delta_omega());
}

/// Reduced state of photon 2, Tr_1 |EPR><EPR|.
inline CMatrix reduced_state_photon2(const BiphotonAmplitude& F) {
  const CMatrix c = discrete_pair_amplitudes(F);
  return c.transpose() * c.conjugate();
}

/// Normalized |phi><phi| for a conditional photon-2 amplitude.
inline CMatrix pure_density_matrix(const CVector& psi) {
  const CVector phi = psi / psi.norm();
  return phi * phi.adjoint();
}

struct DenseConditional {
  double probability = 0.0;  // probability of the outcome cell
  CMatrix rho2;              // normalized conditional state of photon 2
};

/// Tr_13{ (rho_EPR(1,2) x rho(3)) M(k, d) } / Pr, evaluated with explicit
/// density matrices. Requires n_points <= 16.
inline DenseConditional dense_conditional_state(const BiphotonAmplitude& F, const WavePacket& f,
                                                const OutcomeGrid& og, OutcomeIndex o) {
  const int n = og.n_points();
  if (n > kMaxDenseOraclePoints) {
    throw Error(ErrorCode::InvalidParameter, "dense three-photon evaluation limited to 16 points");
  }
  if (!(F.grid1() == f.grid()) || !(og.grid == f.grid())) {
    throw Error(ErrorCode::GridMismatch, "photon 1 and photon 3 must share one grid");
  }
  const int n2 = F.grid2().size();
  const CMatrix c = discrete_pair_amplitudes(F);
  // rho_EPR over (i1, i2), index i1 * n2 + i2.
  CVector pair(n * n2);
  for (int i1 = 0; i1 < n; ++i1) {
    for (int i2 = 0; i2 < n2; ++i2) pair[i1 * n2 + i2] = c(i1, i2);
  }
  const CMatrix rho_epr = pair * pair.adjoint();
  const CVector phi = f.amplitudes() * std::sqrt(f.grid().delta_omega());
  const CMatrix rho3 = phi * phi.adjoint();
  // M over (i1, i3), index i1 * n + i3.
  const CMatrix m = entangled_povm_element(og, o);

  CMatrix out = CMatrix::Zero(n2, n2);
  for (int a = 0; a < n * n; ++a) {
    const int a1 = a / n;
    const int a3 = a % n;
    for (int b = 0; b < n * n; ++b) {
      const cplx mab = m(a, b);
      if (mab == cplx(0.0)) continue;
      const int b1 = b / n;
      const int b3 = b % n;
      // sum_{a,b} M_ab rho_{(b, i2), (a, j2)}
      const cplx r3 = rho3(b3, a3);
      for (int i2 = 0; i2 < n2; ++i2) {
        for (int j2 = 0; j2 < n2; ++j2) {
          out(i2, j2) += mab * rho_epr(b1 * n2 + i2, a1 * n2 + j2) * r3;
        }
      }
    }
  }
  DenseConditional result;
  result.probability = out.trace().real();
  if (result.probability > 0.0) {
    result.rho2 = out / result.probability;
  } else {
    result.rho2 = CMatrix::Zero(n2, n2);
  }
  return result;
}

/// Trace distance between the outcome-averaged conditional states (pure-state
/// path) and the unconditioned reduced state of photon 2.
inline double no_signaling_residual(const BiphotonAmplitude& F, const WavePacket& f,
                                    const OutcomeGrid& og) {
  if (og.n_points() > kMaxDenseOraclePoints) {
    throw Error(ErrorCode::InvalidParameter, "no-signaling check limited to 16 points");
  }
  const int n2 = F.grid2().size();
  CMatrix mixture = CMatrix::Zero(n2, n2);
  for (int s = 0; s < og.n_sectors(); ++s) {
    const int d = og.offset_of_sector(s);
    const CMatrix psi = sector_amplitudes(F, f, og, d);
    for (int k = og.k_begin; k < og.k_end; ++k) {
      const CVector row = psi.row(k).transpose();
      const double p = density_from_amplitude(row, F.grid2()) * og.cell_measure();
      if (p <= 0.0) continue;
      mixture += p * pure_density_matrix(row);
    }
  }
  return trace_distance(mixture, reduced_state_photon2(F));
}

struct DenseCrossCheck {
  double max_state_distance = 0.0;        // trace distance, dense vs pure path
  double max_probability_difference = 0.0;
};

/// Compares every outcome's dense conditional state with the pure-state path.
inline DenseCrossCheck dense_cross_check(const BiphotonAmplitude& F, const WavePacket& f,
                                         const OutcomeGrid& og, double min_probability = 1e-14) {
  DenseCrossCheck out;
  for (int s = 0; s < og.n_sectors(); ++s) {
    const int d = og.offset_of_sector(s);
    for (int k = og.k_begin; k < og.k_end; ++k) {
      const OutcomeIndex o{k, d};
      const DenseConditional dense = dense_conditional_state(F, f, og, o);
      const CVector psi = entangled_outcome_amplitude(F, f, og, o);
      const double p = density_from_amplitude(psi, F.grid2()) * og.cell_measure();
      out.max_probability_difference =
          std::max(out.max_probability_difference, std::abs(p - dense.probability));
      if (p < min_probability) continue;
      out.max_state_distance =
          std::max(out.max_state_distance, trace_distance(dense.rho2, pure_density_matrix(psi)));
    }
  }
  return out;
}

}  // namespace eprtele
