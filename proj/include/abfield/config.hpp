#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "abfield/dynamics.hpp"
#include "abfield/holonomy.hpp"
#include "abfield/lattice.hpp"

namespace abfield {

struct LatticeBlock {
  int nx = 32;
  int ny = 32;
  double spacing = 1.0;
  Boundary boundary = Boundary::Open;
  std::string excise;  // region literal, empty for none
};

// How commands obtain a field configuration.
//   random:   random_config(lattice, seed, rho_min)
//   solenoid: solenoid from [flux] with random |psi| >= rho_min and phases
//   file:     load from `input`
// A random gauge of `gauge_amplitude` is applied to generated fields, and psi
// is set to zero on the `zero` region if given.
struct FieldBlock {
  std::string source = "random";
  std::string input;
  double rho_min = 0.1;
  double gauge_amplitude = 0.0;
  std::string zero;
};

struct CheckBlock {
  int configs = 100;
  int loops = 1000;
  double rho_min = 0.1;
  double gauge_amplitude = 10.0;
  double perturbation = 0.1;
  double tolerance = 1e-10;
  double roundtrip_tolerance = 1e-8;
  double eps = 1e-9;
};

struct SeparabilityBlock {
  std::string x = "X";
  std::string y = "Y";
  std::optional<double> delta;
  double eps = 1e-9;
  double tolerance = 1e-8;
  double holonomy_tolerance = 1e-10;
};

struct CodependenceBlock {
  std::string x = "X";
  std::string y = "Y";
  int alpha_x = 0, alpha_y = 0;
  int beta_x = 0, beta_y = 0;
  bool have_alpha = false;
  bool have_beta = false;
  std::vector<double> e_flux;  // empty: use [flux]
  double tolerance = 1e-10;
  double eps = 1e-9;
};

struct GaugeFixBlock {
  std::string gauge = "coulomb";
  double tolerance = 1e-10;
  double eps = 1e-9;
};

struct SweepBlock {
  std::vector<double> e_flux;
  double tolerance = 0.2;
  bool write_observables = true;
};

struct OutputBlock {
  std::string directory = "out";
  std::string format = "json";
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  LatticeBlock lattice;
  std::optional<FluxSpec> flux;
  std::map<std::string, std::string> regions;
  FieldBlock field;
  CheckBlock check;
  SeparabilityBlock separability;
  CodependenceBlock codependence;
  GaugeFixBlock gauge_fix;
  bool has_dynamics = false;
  EvolutionParams evolution = default_ab_params();
  PacketSpec packet = default_ab_packet();
  AbGeometry geometry = default_ab_geometry();
  SweepBlock sweep;
  OutputBlock output;
};

// INI text. Unknown sections or keys, malformed values and duplicate keys are
// config errors.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

// Real number with an optional factor of pi: "1.3", "pi/2", "3pi/2",
// "0.3 + 2*pi", "-pi".
double parse_phase_expression(std::string_view text);

// Region literal: terms joined by + (union) and - (difference), evaluated left
// to right. A term is `all`, `rect(x0, y0, x1, y1)` (inclusive) or the name of
// another region in `named`.
Region parse_region(std::string_view literal, const Lattice& lattice,
                    const std::map<std::string, std::string>& named = {});

}  // namespace abfield
