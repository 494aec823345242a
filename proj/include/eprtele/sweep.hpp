#pragma once

// Parameter sweeps over (mu, sigma) and the invariant verification suite.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "eprtele/dense.hpp"
#include "eprtele/error.hpp"
#include "eprtele/grid.hpp"
#include "eprtele/moments.hpp"
#include "eprtele/povm.hpp"
#include "eprtele/states.hpp"
#include "eprtele/teleport.hpp"

namespace eprtele {

struct GridSpec {
  double omega_min = 0.0;
  double omega_max = 1.0;
  int n_points = 2;

  FrequencyGrid make() const { return make_frequency_grid(omega_min, omega_max, n_points); }
};

struct InputSpec {
  double center = 0.0;
  double width = 1.0;
  double t0 = 0.0;
};

struct SchedulePoint {
  double mu = 0.0;
  double sigma = 1.0;
};

struct Tolerances {
  double completeness = 1e-9;
  double tail_mass = 1e-8;
  double normalization = 1e-10;
  double parseval = 1e-12;
  double variance_relative = 5e-3;
  double null_channel = 1e-8;
  double no_signaling = 1e-8;
};

struct SweepConfig {
  GridSpec grid;
  double omega1_center = 0.0;
  double omega2_center = 0.0;
  std::vector<SchedulePoint> points;
  InputSpec input;
  AcceptanceWindow window;
  double time_fraction = 1.0;
  MirrorConvention mirror = kDefaultMirrorConvention;
  Tolerances tolerances;

  GaussianEPRParams epr_params(const SchedulePoint& p) const {
    return GaussianEPRParams{p.mu, p.sigma, omega1_center, omega2_center};
  }
};

enum class RecordFlag { Ok, TailViolation, Incomplete, Error };

inline std::string_view to_string(RecordFlag f) {
  switch (f) {
    case RecordFlag::Ok: return "OK";
    case RecordFlag::TailViolation: return "TAIL_VIOLATION";
    case RecordFlag::Incomplete: return "INCOMPLETE";
    case RecordFlag::Error: return "ERROR";
  }
  return "ERROR";
}

struct SweepRecord {
  double mu = 0.0;
  double sigma = 0.0;
  double sigma2_1_minus_mu2 = 0.0;
  double avg_fidelity_raw = std::numeric_limits<double>::quiet_NaN();
  double avg_fidelity_corrected = std::numeric_limits<double>::quiet_NaN();
  double efficiency = std::numeric_limits<double>::quiet_NaN();
  double completeness_residual = std::numeric_limits<double>::quiet_NaN();
  double tail_mass = std::numeric_limits<double>::quiet_NaN();
  RecordFlag flag = RecordFlag::Ok;
  std::string message;
};

/// Total |F|^2 plus input mass outside the grid for one point.
inline double point_tail_mass(const SweepConfig& cfg, const SchedulePoint& p,
                              const FrequencyGrid& g) {
  return epr_tail_mass(cfg.epr_params(p), g, g) + packet_tail_mass(cfg.input.center, cfg.input.width, g);
}

/// One record per schedule point, in schedule order. Per-point failures are
/// flagged and never abort the sweep. completeness_residual is the larger of
/// the outcome-grid POVM residual and |total outcome probability - 1|.
inline std::vector<SweepRecord> run_sweep(const SweepConfig& cfg, int workers = 0) {
  const FrequencyGrid g = cfg.grid.make();
  const OutcomeGrid og = make_outcome_grid(g, cfg.time_fraction);
  const double povm_residual = completeness_residual(og);

  std::optional<WavePacket> input;
  std::string input_error;
  try {
    input = gaussian_packet(cfg.input.center, cfg.input.width, cfg.input.t0, g, cfg.tolerances.tail_mass);
  } catch (const Error& e) {
    input_error = e.what();
  }

  std::vector<SweepRecord> records;
  records.reserve(cfg.points.size());
  for (const SchedulePoint& p : cfg.points) {
    SweepRecord r;
    r.mu = p.mu;
    r.sigma = p.sigma;
    r.sigma2_1_minus_mu2 = p.sigma * p.sigma * (1.0 - p.mu * p.mu);
    r.tail_mass = point_tail_mass(cfg, p, g);
    if (!input) {
      r.flag = RecordFlag::TailViolation;
      r.message = input_error;
      records.push_back(std::move(r));
      continue;
    }
    try {
      const BiphotonAmplitude F = gaussian_epr_amplitude(cfg.epr_params(p), g, g, cfg.tolerances.tail_mass);
      const OutcomeMap map = evaluate_outcomes(F, *input, og, cfg.mirror, workers);
      const ChannelMetrics m = channel_metrics(map, cfg.window);
      r.avg_fidelity_raw = m.avg_fidelity_raw;
      r.avg_fidelity_corrected = m.avg_fidelity_corrected;
      r.efficiency = m.efficiency;
      r.completeness_residual = std::max(povm_residual, std::abs(map.total_probability() - 1.0));
      if (!(r.completeness_residual <= cfg.tolerances.completeness)) r.flag = RecordFlag::Incomplete;
    } catch (const Error& e) {
      r.flag = e.code() == ErrorCode::MassOutsideGrid ? RecordFlag::TailViolation : RecordFlag::Error;
      r.message = e.what();
    }
    records.push_back(std::move(r));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Verification suite.

enum class CheckStatus { Pass, Fail, Warn, Skip };

inline std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Warn: return "WARN";
    case CheckStatus::Skip: return "SKIP";
  }
  return "FAIL";
}

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Skip;
  double measured = std::numeric_limits<double>::quiet_NaN();
  double tolerance = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool passed() const {
    return std::none_of(checks.begin(), checks.end(),
                        [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
  }

  const CheckResult* find(std::string_view name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

namespace detail {

inline CheckResult bound_check(std::string name, double measured, double tolerance,
                               std::string detail = {}) {
  const bool ok = std::isfinite(measured) && measured <= tolerance;
  return CheckResult{std::move(name), ok ? CheckStatus::Pass : CheckStatus::Fail, measured, tolerance,
                     std::move(detail)};
}

inline std::string point_label(const SchedulePoint& p) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "[mu=%.6g,sigma=%.6g]", p.mu, p.sigma);
  return buf;
}

/// min over global phase of || a - e^{i phi} b ||, evaluated on the aligned
/// difference vector (the closed form sqrt(2 - 2|<a|b>|) loses half the digits).
inline double phase_aligned_distance(const WavePacket& a, const WavePacket& b) {
  const cplx overlap = inner_product(b.amplitudes(), a.amplitudes(), a.grid());
  const cplx phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx(1.0);
  return std::sqrt(squared_norm(a.amplitudes() - phase * b.amplitudes(), a.grid()));
}

}  // namespace detail

/// Phase-aligned L2 distance between two normalized packets.
inline double packet_distance(const WavePacket& a, const WavePacket& b) {
  if (!(a.grid() == b.grid())) throw Error(ErrorCode::GridMismatch, "packets on different grids");
  return detail::phase_aligned_distance(a, b);
}

/// Unit vector orthogonal to f, built from a Gaussian displaced by one width.
inline WavePacket orthogonal_companion(const WavePacket& f, const InputSpec& spec) {
  const FrequencyGrid& g = f.grid();
  const WavePacket shifted = gaussian_packet(spec.center + spec.width, spec.width, spec.t0, g, 1.0);
  const cplx proj = inner_product(f.amplitudes(), shifted.amplitudes(), g);
  return normalize(shifted.amplitudes() - proj * f.amplitudes(), g);
}

inline VerificationReport verify(const SweepConfig& cfg, int workers = 0) {
  VerificationReport report;
  auto& out = report.checks;
  const Tolerances& tol = cfg.tolerances;
  const FrequencyGrid g = cfg.grid.make();
  const TimeGrid tg = conjugate_time_grid(g);
  const OutcomeGrid og = make_outcome_grid(g, cfg.time_fraction);

  out.push_back(detail::bound_check(
      "GRID_CONJUGACY", std::abs(tg.delta_t() * g.delta_omega() * g.size() - kTwoPi) / kTwoPi, 1e-12,
      "|dt dw N - 2pi| / 2pi"));

  {
    const CVector v = probe_vector(g.size(), 7);
    const double lhs = squared_norm(v, g);
    const double rhs = to_time_domain(v, g).squaredNorm() * tg.delta_t();
    out.push_back(detail::bound_check("PARSEVAL", std::abs(lhs - rhs) / lhs, tol.parseval,
                                      "relative, random probe vector"));
  }

  const double input_tail = packet_tail_mass(cfg.input.center, cfg.input.width, g);
  out.push_back(detail::bound_check("INPUT_TAIL_MASS", input_tail, tol.tail_mass,
                                    "input spectral mass outside the grid"));
  std::optional<WavePacket> input;
  try {
    input = gaussian_packet(cfg.input.center, cfg.input.width, cfg.input.t0, g, tol.tail_mass);
  } catch (const Error& e) {
    out.push_back(CheckResult{"INPUT_PACKET", CheckStatus::Fail, input_tail, tol.tail_mass, e.what()});
  }
  if (input) {
    out.push_back(detail::bound_check("INPUT_NORMALIZATION",
                                      std::abs(squared_norm(input->amplitudes(), g) - 1.0),
                                      tol.normalization));
    const double energy_sum = energy_distribution(*input).sum() * g.delta_omega();
    out.push_back(detail::bound_check("ENERGY_POVM",
                                      std::max(energy_povm_residual(g), std::abs(energy_sum - 1.0)),
                                      tol.parseval, "projector residual and |sum p - 1|"));
    const double time_sum = time_distribution(*input).sum() * tg.delta_t();
    out.push_back(detail::bound_check("TIME_POVM", std::abs(time_sum - 1.0), tol.parseval,
                                      "|sum p(t) dt - 1|"));
  }
  if (g.size() <= 64) {
    out.push_back(detail::bound_check("TIME_POVM_OPERATOR", time_povm_residual(g), tol.completeness,
                                      "operator norm of sum M(t) - I"));
  }

  out.push_back(detail::bound_check("COMPLETENESS", completeness_residual(og), tol.completeness,
                                    og.n_points() <= kMaxDenseCompletenessPoints
                                        ? "dense operator norm of sum M - I"
                                        : "probe vector ||sum M v - v|| / ||v||"));

  double best_ideality = std::numeric_limits<double>::infinity();
  std::optional<SchedulePoint> most_ideal;

  for (const SchedulePoint& p : cfg.points) {
    const std::string label = detail::point_label(p);
    const GaussianEPRParams params = cfg.epr_params(p);
    const double tail = epr_tail_mass(params, g, g);
    out.push_back(detail::bound_check("EPR_TAIL_MASS" + label, tail, tol.tail_mass));
    if (!(tail <= tol.tail_mass)) continue;
    const BiphotonAmplitude F = gaussian_epr_amplitude(params, g, g, tol.tail_mass);
    out.push_back(detail::bound_check(
        "EPR_NORMALIZATION" + label,
        std::abs(F.values().squaredNorm() * g.delta_omega() * g.delta_omega() - 1.0),
        tol.normalization));

    const RMatrix joint = joint_energy_distribution(F);
    const PairMoments pm = pair_moments(g.points(), g.points(), joint);
    const double expect_sum = 2.0 * p.sigma * p.sigma * (1.0 + p.mu);
    const double expect_diff = 2.0 * p.sigma * p.sigma * (1.0 - p.mu);
    // A direction must span a few cells before its sampled variance means anything.
    auto variance_check = [&](const std::string& name, double measured, double expected, const char* what) {
      if (std::sqrt(expected) >= 2.0 * g.delta_omega()) {
        out.push_back(detail::bound_check(name + label, std::abs(measured / expected - 1.0),
                                          tol.variance_relative, what));
      } else {
        out.push_back(CheckResult{name + label, CheckStatus::Skip, NAN, tol.variance_relative,
                                  "width below two grid cells"});
      }
    };
    variance_check("VARIANCE_SUM", pm.sum.variance, expect_sum, "relative to 2 sigma^2 (1 + mu)");
    variance_check("VARIANCE_DIFF", pm.difference.variance, expect_diff, "relative to 2 sigma^2 (1 - mu)");

    if (input) {
      const RMatrix density = outcome_density_map(F, *input, og, workers);
      out.push_back(detail::bound_check("PROBABILITY_TOTAL" + label,
                                        std::abs(total_probability(density, og) - 1.0),
                                        tol.completeness, "|sum p(t, Omega_-) - 1|"));
      if (g.size() <= kMaxDenseOraclePoints) {
        out.push_back(detail::bound_check("NO_SIGNALING" + label, no_signaling_residual(F, *input, og),
                                          tol.no_signaling, "trace distance to Tr_1 rho_EPR"));
        const DenseCrossCheck cc = dense_cross_check(F, *input, og);
        out.push_back(detail::bound_check(
            "DENSE_CONDITIONAL" + label,
            std::max(cc.max_state_distance, cc.max_probability_difference), tol.no_signaling,
            "dense three-photon evaluation vs pure-state path"));
      }
    }
    if (params.ideality() < best_ideality) {
      best_ideality = params.ideality();
      most_ideal = p;
    }
  }
  if (g.size() > kMaxDenseOraclePoints) {
    out.push_back(CheckResult{"NO_SIGNALING", CheckStatus::Skip, NAN, tol.no_signaling,
                              "dense oracle needs n_points <= 16"});
  }

  if (input && most_ideal) {
    // Zero-correlation channel: the conditional state cannot depend on the input.
    try {
      SchedulePoint null_point{0.0, most_ideal->sigma};
      const BiphotonAmplitude F0 = gaussian_epr_amplitude(cfg.epr_params(null_point), g, g, tol.tail_mass);
      const WavePacket other = orthogonal_companion(*input, cfg.input);
      const RMatrix density = outcome_density_map(F0, *input, og, workers);
      OutcomeMap probe{og, density, density, density, false};
      const OutcomeIndex o = probe.argmax();
      const TeleportResult a = teleport_once(F0, *input, og, o, cfg.mirror);
      const TeleportResult b = teleport_once(F0, other, og, o, cfg.mirror);
      const CVector marginal = F0.values().row(og.grid.size() / 2).transpose();
      const WavePacket m2 = normalize(marginal, g);
      const double dist = std::max(packet_distance(a.conditional_state, b.conditional_state),
                                   packet_distance(a.conditional_state, m2));
      out.push_back(detail::bound_check("NULL_CHANNEL", dist, tol.null_channel,
                                        "mu = 0: conditional state vs other input and marginal"));
    } catch (const Error& e) {
      out.push_back(CheckResult{"NULL_CHANNEL", CheckStatus::Fail, NAN, tol.null_channel, e.what()});
    }

    // Mirror convention: pick whichever gives the higher probability-weighted
    // corrected fidelity at the most ideal point.
    try {
      const BiphotonAmplitude F = gaussian_epr_amplitude(cfg.epr_params(*most_ideal), g, g, tol.tail_mass);
      auto average = [&](MirrorConvention c) {
        const OutcomeMap map = evaluate_outcomes(F, *input, og, c, workers);
        double total = 0.0;
        double acc = 0.0;
        for (Eigen::Index s = 0; s < map.density.rows(); ++s) {
          for (Eigen::Index k = 0; k < map.density.cols(); ++k) {
            total += map.density(s, k);
            acc += map.density(s, k) * map.fidelity_corrected(s, k);
          }
        }
        return total > 0.0 ? acc / total : 0.0;
      };
      const double fid_single = average(MirrorConvention::PumpMinusOmegaMinus);
      const double fid_double = average(MirrorConvention::PumpMinusTwiceOmegaMinus);
      const MirrorConvention best = fid_double >= fid_single ? MirrorConvention::PumpMinusTwiceOmegaMinus
                                                             : MirrorConvention::PumpMinusOmegaMinus;
      char buf[200];
      std::snprintf(buf, sizeof buf, "best=%s (avg F=%.6f vs %.6f), configured=%s",
                    std::string(to_string(best)).c_str(), std::max(fid_single, fid_double),
                    std::min(fid_single, fid_double), std::string(to_string(cfg.mirror)).c_str());
      out.push_back(CheckResult{"MIRROR_CONVENTION", best == cfg.mirror ? CheckStatus::Pass : CheckStatus::Warn,
                                std::max(fid_single, fid_double), NAN, buf});
    } catch (const Error& e) {
      out.push_back(CheckResult{"MIRROR_CONVENTION", CheckStatus::Warn, NAN, NAN, e.what()});
    }
  }
  return report;
}

}  // namespace eprtele
