// syncap: runs the capture-system experiments against the simulator.
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "syncap/common/error.hpp"
#include "syncap/harness/config.hpp"
#include "syncap/harness/frequency_sweep.hpp"
#include "syncap/harness/missdetection.hpp"
#include "syncap/harness/reconstruction.hpp"
#include "syncap/harness/session.hpp"
#include "syncap/harness/sync_comparison.hpp"
#include "syncap/harness/volumetric.hpp"

namespace h = syncap::harness;

namespace {

struct Options {
  std::string config = "easy";
  std::uint64_t seed = 1;
  std::string out;
};

using Experiment = std::function<h::Report(const h::Config&, std::uint64_t, const std::optional<std::filesystem::path>&)>;

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "preset (easy, medium, hard, noiseless) or JSON file")->capture_default_str();
  cmd->add_option("--seed", o.seed, "base seed")->capture_default_str();
  cmd->add_option("--out", o.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated multi-device capture: sync, data plane, reconstruction and volumetric experiments"};
  app.require_subcommand(1);
  Options opt;

  const std::vector<std::pair<std::string, std::pair<std::string, Experiment>>> experiments{
      {"run",
       {"simulate one capture session end to end",
        [](const h::Config& c, std::uint64_t s, const auto& out) { return h::run_session_experiment(c, s, out).report; }}},
      {"sync-compare",
       {"compare synchronization schemes across jitter levels",
        [](const h::Config& c, std::uint64_t s, const auto& out) { return h::run_sync_comparison(c, s, out).report; }}},
      {"freq-sweep",
       {"merged-capture gaps against trigger frequency under a bandwidth cap",
        [](const h::Config& c, std::uint64_t s, const auto& out) { return h::run_frequency_sweep(c, s, out).report; }}},
      {"reconstruct",
       {"3D skeletons with global and incremental bundle adjustment",
        [](const h::Config& c, std::uint64_t s, const auto& out) { return h::run_reconstruction(c, s, out).report; }}},
      {"missdet-sweep",
       {"re-projection error against the miss-detection rate",
        [](const h::Config& c, std::uint64_t s, const auto& out) {
          return h::run_missdetection_sweep(c, s, out).report;
        }}},
      {"volumetric",
       {"visual hull carving and meshing",
        [](const h::Config& c, std::uint64_t s, const auto& out) { return h::run_volumetric(c, s, out).report; }}},
  };

  std::vector<std::pair<CLI::App*, Experiment>> commands;
  for (const auto& [name, entry] : experiments) {
    auto* cmd = app.add_subcommand(name, entry.first);
    add_common(cmd, opt);
    commands.emplace_back(cmd, entry.second);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const h::Config config = h::load_config(opt.config);
    std::optional<std::filesystem::path> out;
    if (!opt.out.empty()) out = opt.out;
    for (const auto& [cmd, run] : commands) {
      if (!cmd->parsed()) continue;
      const h::Report report = run(config, opt.seed, out);
      report.print(std::cout);
      std::cout << (report.passed() ? "all assertions passed" : "assertions failed") << " (config " << config.name
                << ", hash " << h::config_hash(config) << ", seed " << opt.seed << ")\n";
      return report.passed() ? 0 : 1;
    }
  } catch (const syncap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
