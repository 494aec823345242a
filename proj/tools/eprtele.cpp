// Command-line driver: simulate | sweep | verify.
//
//   eprtele simulate --config run.json [--out map.csv] [--format csv|json]
//   eprtele sweep    --config run.json [--out sweep.csv] [--format csv|json]
//   eprtele verify   --config run.json [--out report.txt]
//
// Exit codes: 0 success, 1 numerical validation or check failure, 2 usage or
// configuration error. EPRTELE_THREADS sets the worker count.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eprtele/config.hpp"
#include "eprtele/io.hpp"
#include "eprtele/sweep.hpp"
#include "eprtele/teleport.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  std::optional<double> mu;
  std::optional<double> sigma;
  std::optional<int> n_points;
};

bool emit(const Options& opt, const std::string& text) {
  if (opt.out_path.empty()) {
    std::cout << text;
    return true;
  }
  std::ofstream out(opt.out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write '" << opt.out_path << "'\n";
    return false;
  }
  out << text;
  return static_cast<bool>(out);
}

int run_simulate(const Options& opt, const eprtele::RunConfig& rc) {
  using namespace eprtele;
  const SweepConfig& cfg = rc.sweep;
  const SchedulePoint point = cfg.points.front();
  if (cfg.points.size() > 1) {
    std::cerr << "note: simulate uses the first of " << cfg.points.size() << " (mu, sigma) points\n";
  }
  try {
    const FrequencyGrid g = cfg.grid.make();
    const OutcomeGrid og = make_outcome_grid(g, cfg.time_fraction);
    const WavePacket input =
        gaussian_packet(cfg.input.center, cfg.input.width, cfg.input.t0, g, cfg.tolerances.tail_mass);
    const BiphotonAmplitude F = gaussian_epr_amplitude(cfg.epr_params(point), g, g, cfg.tolerances.tail_mass);
    window_cells(og, cfg.window);

    const OutcomeMap map = evaluate_outcomes(F, input, og, cfg.mirror);
    const ChannelMetrics metrics = channel_metrics(map, cfg.window);
    const OutcomeIndex selected_index =
        rc.simulate_outcome ? locate_outcome(og, rc.simulate_outcome->first, rc.simulate_outcome->second)
                            : map.argmax();
    const TeleportResult selected = teleport_once(F, input, og, selected_index, cfg.mirror);

    SimulationSummary summary{point.mu, point.sigma, map.total_probability(), metrics, {}};
    if (point.mu == 0.0) {
      summary.notes.emplace_back(
          "mu = 0: the joint amplitude factorizes; the conditional state of photon 2 is independent of the "
          "input packet");
    }
    if (map.any_interpolated || selected.interpolated) {
      summary.notes.emplace_back("mirror point off the frequency lattice; reconstruction used linear interpolation");
    }
    const std::string text = opt.format == "json" ? simulate_json(map, selected, summary, rc.echo)
                                                  : simulate_csv(map, selected, summary);
    return emit(opt, text) ? kExitOk : kExitCheckFailed;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

int run_sweep(const Options& opt, const eprtele::RunConfig& rc) {
  using namespace eprtele;
  try {
    const auto records = eprtele::run_sweep(rc.sweep);
    const std::string text = opt.format == "json" ? sweep_json(records, rc.echo) : sweep_csv(records);
    return emit(opt, text) ? kExitOk : kExitCheckFailed;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

int run_verify(const Options& opt, const eprtele::RunConfig& rc) {
  using namespace eprtele;
  try {
    const VerificationReport report = verify(rc.sweep);
    const std::string text = verification_text(report);
    std::cout << text;
    if (!opt.out_path.empty() && !emit(opt, text)) return kExitCheckFailed;
    return report.passed() ? kExitOk : kExitCheckFailed;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-time EPR teleportation simulator for single-photon wave packets"};
  app.require_subcommand(1, 1);

  Options opt;
  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON run configuration")->required();
    sub->add_option("--out", opt.out_path, "Output file (stdout when omitted)");
    sub->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--mu", opt.mu, "Override the correlation coefficient of every point");
    sub->add_option("--sigma", opt.sigma, "Override the spectral width of every point");
    sub->add_option("--n-points", opt.n_points, "Override the grid size");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "Outcome map and one teleportation result");
  CLI::App* sweep = app.add_subcommand("sweep", "Fidelity/efficiency records over (mu, sigma)");
  CLI::App* verify = app.add_subcommand("verify", "Invariant verification suite");
  add_common(simulate);
  add_common(sweep);
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  eprtele::RunConfig rc;
  try {
    rc = eprtele::load_config(opt.config_path, eprtele::ConfigOverrides{opt.mu, opt.sigma, opt.n_points});
  } catch (const eprtele::ConfigError& e) {
    std::cerr << "config error: " << opt.config_path << ": " << e.what() << '\n';
    return kExitUsage;
  }

  if (simulate->parsed()) return run_simulate(opt, rc);
  if (sweep->parsed()) return run_sweep(opt, rc);
  return run_verify(opt, rc);
}
