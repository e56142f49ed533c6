#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "abfield/abfield.h"

namespace {

constexpr int kExitPassed = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct Flags {
  std::string config;
  std::string out;
  std::string format;
  std::string input;
  std::optional<std::uint64_t> seed;
};

int run(const std::string& command, const Flags& flags) {
  abf_run_options opts{};
  opts.config_path = flags.config.empty() ? nullptr : flags.config.c_str();
  opts.out_dir = flags.out.empty() ? nullptr : flags.out.c_str();
  opts.format = flags.format.empty() ? nullptr : flags.format.c_str();
  opts.input = flags.input.empty() ? nullptr : flags.input.c_str();
  opts.has_seed = flags.seed.has_value() ? 1 : 0;
  opts.seed = flags.seed.value_or(0);

  abf_report* report = nullptr;
  const abf_status status = abf_run(command.c_str(), &opts, &report);
  if (status != ABF_OK) {
    std::cerr << "abfield " << command << ": " << abf_status_name(status) << ": "
              << abf_last_error_message() << "\n";
    return status == ABF_ERR_CONFIG ? kExitUsage : kExitRuntime;
  }
  std::cout << abf_report_json(report) << "\n";
  const bool passed = abf_report_passed(report) != 0;
  abf_report_free(report);
  if (!passed) std::cerr << "abfield " << command << ": checks failed\n";
  return passed ? kExitPassed : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D U(1) lattice gauge simulator and analysis toolkit", "abfield"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(abf_version()));

  Flags flags;
  const auto add_common = [&flags](CLI::App* sub) {
    sub->add_option("--config", flags.config, "Experiment configuration file");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--seed", flags.seed, "Random seed");
    sub->add_option("--format", flags.format, "State file format")
        ->check(CLI::IsMember({"json", "csv", "binary"}));
  };

  const std::pair<const char*, const char*> commands[] = {
      {"check-invariance", "Run the gauge invariance, completeness and round-trip suites"},
      {"check-stokes", "Check the discrete Stokes identity on random loops"},
      {"separability", "Analyse a region cover and build a non-separability witness"},
      {"codependence", "Compare phase transport through two covering regions"},
      {"ab-sweep", "Run the double-slit experiment over a list of fluxes"},
      {"gauge-fix", "Bring a configuration to Coulomb or unitary gauge"},
      {"dump", "Write the configured field and its invariants"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help));
  CLI::App* load = app.add_subcommand("load", "Read a state file and write it back out");
  add_common(load);
  load->add_option("path", flags.input, "State file to read")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  for (CLI::App* sub : app.get_subcommands()) return run(sub->get_name(), flags);
  return kExitUsage;
}
