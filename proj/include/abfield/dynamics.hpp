#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "abfield/fields.hpp"
#include "abfield/holonomy.hpp"

namespace abfield {

// Damping strip along every open lattice edge. Inside the strip of `width`
// sites, psi is multiplied by 1 - strength * sin^2(pi u / 2) after each step,
// u = (width - distance to edge) / width.
struct Absorber {
  int width = 20;
  double strength = 0.1;
};

struct EvolutionParams {
  double mass = 1.0;
  double dt = 0.5;
  int steps = 700;
  double solver_tol = 1e-12;
  int max_iterations = 1000;
  std::optional<Absorber> absorber;
};

void validate(const EvolutionParams& params);

// Centre and width in physical units (site (x, y) sits at (x h, y h)).
struct PacketSpec {
  double center_x = 0.0;
  double center_y = 0.0;
  double width = 1.0;
  double momentum_x = 0.0;
  double momentum_y = 0.0;
};

// (H psi)(s) = -(1 / (2 m h^2)) sum over links s -> s' of
// [exp(-i a(s -> s')) psi(s') - psi(s)]. Excised neighbours count as psi = 0.
std::vector<Complex> hamiltonian_apply(const FieldConfig& c, std::span<const Complex> psi,
                                       double mass);
std::vector<Complex> hamiltonian_apply(const FieldConfig& c, double mass);

// h^2 sum |psi|^2
double total_probability(const Lattice& lattice, std::span<const Complex> psi);

// Repeated Crank-Nicolson steps for a fixed configuration. The system
// (1 + i dt H / 2) psi' = (1 - i dt H / 2) psi is solved by BiCGSTAB, warm
// started from the previous step.
class CrankNicolson {
 public:
  CrankNicolson(const FieldConfig& c, const EvolutionParams& params);
  ~CrankNicolson();
  CrankNicolson(CrankNicolson&&) noexcept;
  CrankNicolson& operator=(CrankNicolson&&) noexcept;

  // One step in place; applies the absorber if configured.
  void step(std::vector<Complex>& psi);
  int last_iterations() const noexcept { return last_iterations_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int last_iterations_ = 0;
  double last_residual_ = 0.0;
};

std::vector<Complex> step_crank_nicolson(std::span<const Complex> psi, const FieldConfig& c,
                                         const EvolutionParams& params);

// Unit-probability packet exp(-|r - r0|^2 / (4 w^2)) exp(i k.r), zero on
// excised sites.
std::vector<Complex> gaussian_packet(const Lattice& lattice, const PacketSpec& spec);

// Double-slit layout in site coordinates. The barrier occupies
// `barrier_thickness` rows from `barrier_row` and is open at two slits of
// `slit_width` sites centred at axis -/+ slit_separation / 2, where the axis
// is the vertical line x = (nx - 1) / 2. The solenoid sits on the axis between
// the barrier and the screen row.
struct AbGeometry {
  int nx = 192;
  int ny = 256;
  double spacing = 1.0;
  int barrier_row = 125;
  int barrier_thickness = 3;
  int slit_width = 6;
  double slit_separation = 40.0;
  double solenoid_y = 150.5;
  double solenoid_radius = 3.0;
  int screen_row = 220;
  double fit_k_min = 0.2;  // fringe wavenumber search range, inverse sites
  double fit_k_max = 1.0;

  double axis() const { return 0.5 * (nx - 1); }
};

void validate(const AbGeometry& geometry);

AbGeometry default_ab_geometry();
EvolutionParams default_ab_params();
PacketSpec default_ab_packet();

FluxSpec ab_flux_spec(const AbGeometry& geometry, double e_flux);

// Barrier, slits and solenoid in string gauge (flux string running from the
// solenoid towards the screen, away from the source).
FieldConfig ab_config(const AbGeometry& geometry, double e_flux);

struct StepObservables {
  int step;
  double norm;
  double screen_accumulated;
  double transmitted;  // probability beyond the barrier
};

struct AbRun {
  std::vector<double> intensity;  // time-integrated |psi|^2 on the screen row
  double transmitted = 0.0;       // largest probability beyond the barrier
  std::vector<StepObservables> observables;
};

// The packet is cut off at the barrier and renormalised, so the initial
// state lives on the source side only.
AbRun run_ab(const AbGeometry& geometry, double e_flux, const EvolutionParams& params,
             const PacketSpec& packet);

struct FringeFit {
  double phase = 0.0;       // phi in I = E (1 + V cos(k u + phi))
  double wavenumber = 0.0;  // k, inverse sites
  double visibility = 0.0;
  double quality = 0.0;     // R^2 of the fit on the window, clamped to [0, 1]
};

// Least-squares fringe fit over the central half of the screen. The screen
// coordinate is u = axis - x. Without a wavenumber, k is searched on
// [k_min, k_max] and refined.
FringeFit fit_fringes(std::span<const double> intensity, double axis,
                      std::optional<double> wavenumber, double k_min = 0.2,
                      double k_max = 1.0);

struct FringeResult {
  int screen_row = 0;
  double e_flux = 0.0;
  std::vector<double> intensity;
  double extracted_shift = 0.0;  // wrap(phi_flux - phi_ref)
  double fit_quality = 0.0;
  double wavenumber = 0.0;
  double transmitted = 0.0;
  std::vector<StepObservables> observables;
};

struct AbReference {
  AbRun run;
  FringeFit fit;
};

AbReference ab_reference(const AbGeometry& geometry, const EvolutionParams& params,
                         const PacketSpec& packet);

// Runs the flux experiment and compares it to `reference` (computed here at
// zero flux when absent).
FringeResult ab_experiment(const AbGeometry& geometry, double e_flux,
                           const EvolutionParams& params, const PacketSpec& packet,
                           const AbReference* reference = nullptr);

double predicted_shift(double e_flux);

struct StaticCheck {
  double res1 = 0.0;  // max |(1/h^2) sum [cos(a) rho(s') - rho(s)]|
  double res2 = 0.0;  // max |(1/h^2) sum sin(a) rho(s')|
};

// Evaluates the real and imaginary parts of the stationary equations in
// unitary gauge. For an eigenstate with energy E, res1 = 2 m |E| max rho and
// res2 vanishes up to the eigenvector accuracy.
StaticCheck unitary_gauge_static_check(const FieldConfig& c, double eps = kDefaultEps);

}  // namespace abfield
