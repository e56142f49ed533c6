#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "abfield/config.hpp"
#include "abfield/fields.hpp"

namespace abfield {

struct CommandOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;  // json, csv, binary
  std::optional<std::string> input;   // file argument of `load`
};

struct CommandReport {
  bool passed = false;
  std::string json;                // report document
  std::vector<std::string> files;  // outputs written, relative to the output directory
};

// Subcommands: check-invariance, check-stokes, separability, codependence,
// ab-sweep, gauge-fix, dump, load. Throws Error on configuration or runtime
// failures; a completed run whose checks fail returns passed = false.
CommandReport run_command(const std::string& name, const CommandOptions& options);

const std::vector<std::string>& command_names();

// Field configuration described by the [lattice], [flux] and [field] blocks.
FieldConfig build_field(const ExperimentConfig& cfg, std::uint64_t seed,
                        std::optional<double> e_flux = std::nullopt);

}  // namespace abfield
