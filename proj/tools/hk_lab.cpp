// hk_lab: run bounded-confidence experiments and audit their bounds.
//
//   hk_lab sync-run --generator uniform-box --n 10 --d 2 --eps 0.3 --seed 1 --out runs/a
//   hk_lab mc --n 5 --eps 0.3 --delta 0.03 --trials 200 --seed 7 --out runs/mc
//
// Exit codes: 0 pass, 1 audit failure, 2 usage error, 3 runtime or IO error.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hk/experiment.hpp"

namespace {

struct FlagSet {
  std::string config;
  std::map<std::string, std::string> values;  // setting key -> raw text
};

void add_common_flags(CLI::App& cmd, FlagSet& flags) {
  cmd.add_option("--config", flags.config, "Flat 'key = value' config file; flags override it");
  const std::vector<std::pair<std::string, std::string>> options = {
      {"seed", "64-bit seed (required for randomized runs)"},
      {"out", "Output directory"},
      {"n", "Agent count"},
      {"d", "Opinion dimension"},
      {"eps", "Confidence bound, or comma-separated per-agent bounds"},
      {"delta", "Equilibrium resolution delta"},
      {"trials", "Monte Carlo trials"},
      {"cap", "Step cap (0 = mode default)"},
      {"scheduler", "uniform | roundrobin | script:PATH"},
      {"generator", "uniform-box | line-chain | clustered | paper-example-1"},
      {"audit", "on | off"},
      {"profile", "Initial profile file ('n d' header then rows)"},
      {"bounds", "Per-agent bounds file (one line)"},
      {"workers", "Monte Carlo worker threads (0 = all cores)"},
      {"movement-tol", "Asymptotic stop threshold for hetero runs (0 disables)"},
      {"tol", "Coincidence tolerance"},
      {"L", "uniform-box side length"},
      {"spacing", "line-chain spacing"},
      {"k", "clustered: number of clusters"},
      {"spread", "clustered: cluster width"},
      {"gap", "clustered: distance between cluster centers"},
  };
  for (const auto& [key, help] : options) {
    const std::string name = "--" + key;
    cmd.add_option_function<std::string>(
        name, [&flags, key = key](const std::string& v) { flags.values[key] = v; }, help);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded-confidence opinion dynamics laboratory"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    hk::Mode mode;
  };
  const std::vector<Command> commands = {
      {"sync-run", "Synchronous homogeneous run with Lyapunov, singleton and spectral audits", hk::Mode::sync},
      {"async-run", "Asynchronous run to a delta-equilibrium with potential-game audits", hk::Mode::async},
      {"hetero-run", "Synchronous run with per-agent bounds and silence tracking", hk::Mode::hetero},
      {"spectral-audit", "Spectral report for the communication graph of one profile", hk::Mode::spectral_audit},
      {"mc", "Monte Carlo hitting times and switch counts under uniform scheduling", hk::Mode::mc},
  };

  std::vector<FlagSet> flags(commands.size());
  std::vector<CLI::App*> subs;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    CLI::App* sub = app.add_subcommand(commands[c].name, commands[c].help);
    add_common_flags(*sub, flags[c]);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hk::kExitUsage;
  }

  std::size_t chosen = 0;
  for (std::size_t c = 0; c < subs.size(); ++c)
    if (subs[c]->parsed()) chosen = c;

  try {
    hk::ExperimentConfig config;
    config.mode = commands[chosen].mode;
    if (!flags[chosen].config.empty())
      for (const auto& [key, value] : hk::load_settings(flags[chosen].config))
        hk::apply_setting(config, key, value);
    config.mode = commands[chosen].mode;
    for (const auto& [key, value] : flags[chosen].values) hk::apply_setting(config, key, value);

    const hk::ExperimentResult result = hk::run_experiment(config);
    std::cout << commands[chosen].name << ": " << (result.failed_audits.empty() ? "all audits passed" : "audit failure")
              << " (summary: " << config.out_dir << "/summary.json)\n";
    for (const std::string& f : result.failed_audits) std::cerr << "FAILED " << f << '\n';
    return result.exit_code;
  } catch (const hk::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return hk::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hk::kExitRuntime;
  }
}
