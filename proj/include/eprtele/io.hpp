#pragma once

// CSV / JSON serialization of sweep records, outcome maps and verification
// reports. Numbers are written with 17 significant digits.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eprtele/sweep.hpp"
#include "eprtele/teleport.hpp"

namespace eprtele {

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// JSON has no NaN; non-finite values become null.
inline std::string json_number(double x) { return std::isfinite(x) ? format_number(x) : "null"; }

inline std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

inline constexpr const char* kSweepCsvHeader =
    "mu,sigma,sigma2_1mu2,avg_fid_raw,avg_fid_corr,efficiency,completeness_residual,tail_mass,flag";

inline std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream out;
  out << kSweepCsvHeader << '\n';
  for (const auto& r : records) {
    out << format_number(r.mu) << ',' << format_number(r.sigma) << ',' << format_number(r.sigma2_1_minus_mu2)
        << ',' << format_number(r.avg_fidelity_raw) << ',' << format_number(r.avg_fidelity_corrected) << ','
        << format_number(r.efficiency) << ',' << format_number(r.completeness_residual) << ','
        << format_number(r.tail_mass) << ',' << to_string(r.flag) << '\n';
  }
  return out.str();
}

inline std::string sweep_json(const std::vector<SweepRecord>& records, const nlohmann::json& config_echo) {
  std::ostringstream out;
  out << "{\n  \"config\": " << config_echo.dump() << ",\n  \"records\": [";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out << (i == 0 ? "\n" : ",\n") << "    {\"mu\": " << json_number(r.mu)
        << ", \"sigma\": " << json_number(r.sigma) << ", \"sigma2_1mu2\": " << json_number(r.sigma2_1_minus_mu2)
        << ", \"avg_fid_raw\": " << json_number(r.avg_fidelity_raw)
        << ", \"avg_fid_corr\": " << json_number(r.avg_fidelity_corrected)
        << ", \"efficiency\": " << json_number(r.efficiency)
        << ", \"completeness_residual\": " << json_number(r.completeness_residual)
        << ", \"tail_mass\": " << json_number(r.tail_mass) << ", \"flag\": " << json_string(to_string(r.flag));
    if (!r.message.empty()) out << ", \"message\": " << json_string(r.message);
    out << '}';
  }
  out << "\n  ]\n}\n";
  return out.str();
}

struct SimulationSummary {
  double mu = 0.0;
  double sigma = 0.0;
  double total_probability = 0.0;
  ChannelMetrics metrics;
  std::vector<std::string> notes;
};

inline constexpr const char* kSimulateCsvHeader = "t,omega_minus,density,fidelity_raw,fidelity_corrected";

/// Full outcome map (sector-major, then time) followed by a '#' summary block.
inline std::string simulate_csv(const OutcomeMap& map, const TeleportResult& selected,
                                const SimulationSummary& summary) {
  std::ostringstream out;
  out << kSimulateCsvHeader << '\n';
  const OutcomeGrid& og = map.grid;
  for (int s = 0; s < og.n_sectors(); ++s) {
    const std::string om = format_number(og.omega_minus(og.offset_of_sector(s)));
    for (int c = 0; c < og.n_times(); ++c) {
      out << format_number(og.time.point(c + og.k_begin)) << ',' << om << ',' << format_number(map.density(s, c))
          << ',' << format_number(map.fidelity_raw(s, c)) << ',' << format_number(map.fidelity_corrected(s, c))
          << '\n';
    }
  }
  out << "# summary\n";
  out << "# mu," << format_number(summary.mu) << '\n';
  out << "# sigma," << format_number(summary.sigma) << '\n';
  out << "# total_probability," << format_number(summary.total_probability) << '\n';
  out << "# avg_fid_raw," << format_number(summary.metrics.avg_fidelity_raw) << '\n';
  out << "# avg_fid_corr," << format_number(summary.metrics.avg_fidelity_corrected) << '\n';
  out << "# efficiency," << format_number(summary.metrics.efficiency) << '\n';
  out << "# selected_t," << format_number(selected.outcome.t) << '\n';
  out << "# selected_omega_minus," << format_number(selected.outcome.omega_minus) << '\n';
  out << "# selected_density," << format_number(selected.outcome.probability_density) << '\n';
  out << "# selected_fidelity_raw," << format_number(selected.fidelity_raw) << '\n';
  out << "# selected_fidelity_corrected," << format_number(selected.fidelity_corrected) << '\n';
  out << "# mirror_center," << format_number(selected.reconstruction.mirror_center) << '\n';
  out << "# phase_time," << format_number(selected.reconstruction.phase_time) << '\n';
  for (const auto& note : summary.notes) out << "# note," << note << '\n';
  return out.str();
}

inline std::string simulate_json(const OutcomeMap& map, const TeleportResult& selected,
                                 const SimulationSummary& summary, const nlohmann::json& config_echo) {
  std::ostringstream out;
  const OutcomeGrid& og = map.grid;
  out << "{\n  \"config\": " << config_echo.dump() << ",\n  \"outcomes\": [";
  bool first = true;
  for (int s = 0; s < og.n_sectors(); ++s) {
    const std::string om = json_number(og.omega_minus(og.offset_of_sector(s)));
    for (int c = 0; c < og.n_times(); ++c) {
      out << (first ? "\n" : ",\n") << "    {\"t\": " << json_number(og.time.point(c + og.k_begin))
          << ", \"omega_minus\": " << om << ", \"density\": " << json_number(map.density(s, c))
          << ", \"fidelity_raw\": " << json_number(map.fidelity_raw(s, c))
          << ", \"fidelity_corrected\": " << json_number(map.fidelity_corrected(s, c)) << '}';
      first = false;
    }
  }
  out << "\n  ],\n  \"selected\": {\"t\": " << json_number(selected.outcome.t)
      << ", \"omega_minus\": " << json_number(selected.outcome.omega_minus)
      << ", \"density\": " << json_number(selected.outcome.probability_density)
      << ", \"fidelity_raw\": " << json_number(selected.fidelity_raw)
      << ", \"fidelity_corrected\": " << json_number(selected.fidelity_corrected)
      << ", \"mirror_center\": " << json_number(selected.reconstruction.mirror_center)
      << ", \"phase_time\": " << json_number(selected.reconstruction.phase_time)
      << ", \"interpolated\": " << (selected.interpolated ? "true" : "false") << ", \"conditional_state\": [";
  const CVector& amp = selected.conditional_state.amplitudes();
  for (Eigen::Index i = 0; i < amp.size(); ++i) {
    out << (i == 0 ? "" : ", ") << '[' << json_number(amp[i].real()) << ", " << json_number(amp[i].imag()) << ']';
  }
  out << "]},\n  \"summary\": {\"mu\": " << json_number(summary.mu) << ", \"sigma\": " << json_number(summary.sigma)
      << ", \"total_probability\": " << json_number(summary.total_probability)
      << ", \"avg_fid_raw\": " << json_number(summary.metrics.avg_fidelity_raw)
      << ", \"avg_fid_corr\": " << json_number(summary.metrics.avg_fidelity_corrected)
      << ", \"efficiency\": " << json_number(summary.metrics.efficiency) << ", \"notes\": [";
  for (std::size_t i = 0; i < summary.notes.size(); ++i) {
    out << (i == 0 ? "" : ", ") << json_string(summary.notes[i]);
  }
  out << "]}\n}\n";
  return out.str();
}

inline std::string verification_text(const VerificationReport& report) {
  std::ostringstream out;
  for (const auto& c : report.checks) {
    char tol[32];
    std::snprintf(tol, sizeof tol, "%.3g", c.tolerance);
    char line[512];
    std::snprintf(line, sizeof line, "%-4s %-44s residual=%-24s tol=%-8s %s", std::string(to_string(c.status)).c_str(),
                  c.name.c_str(), format_number(c.measured).c_str(), tol, c.detail.c_str());
    out << line << '\n';
  }
  out << (report.passed() ? "verify: all checks passed\n" : "verify: FAILED\n");
  return out.str();
}

}  // namespace eprtele
