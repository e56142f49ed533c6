#pragma once

#include <vector>

#include "abfield/fields.hpp"
#include "abfield/lattice.hpp"

namespace abfield {

struct HolonomyValue {
  double raw;      // signed sum of link phases along the loop
  double wrapped;  // raw mapped into (-pi, pi]
};

HolonomyValue holonomy(const FieldConfig& c, const Loop& loop);
// Sum of link phases along an open path.
double path_integral(const FieldConfig& c, std::span<const DirectedLink> path);

// Counterclockwise sum of the four boundary links (unwrapped).
double plaquette_flux(const FieldConfig& c, int plaquette);

// |holonomy - sum_p winding(p) * flux(p)|. Throws not-contractible when the
// loop winds around a plaquette with an excised corner.
double stokes_residual(const FieldConfig& c, const Loop& loop);

// Thin solenoid. Centre in lattice coordinates (site (x, y) sits at (x, y));
// total_flux is the charge times the enclosed flux.
struct FluxSpec {
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 0.0;
  double total_flux = 0.0;
};

// Sites strictly inside the radius are excised. Flux is spread evenly over the
// plaquettes touching an excised site, so every cycle of the remaining lattice
// encloses either all of it or none. With no excised site (radius below the
// site spacing) the plaquettes whose centres lie within the radius are used.
struct SolenoidLayout {
  std::vector<int> excised_sites;
  std::vector<int> flux_plaquettes;
};

SolenoidLayout solenoid_layout(const Lattice& lattice, const FluxSpec& spec);

// Superposition of discrete vortex profiles, one per flux plaquette carrying
// total_flux / N: each link gets (flux/N) * (angle subtended at the vortex
// centre) / 2pi. psi = background on active sites; the solenoid interior is
// excised on top of any sites already excised in `lattice`.
FieldConfig solenoid_config(const Lattice& lattice, const FluxSpec& spec,
                            Complex background);

// Gauge function that moves each vortex's flux string onto a straight cut
// leaving the vortex along `cut_angle` (radians, counterclockwise from +x).
// After applying it the link field vanishes away from the cuts.
GaugeTransform string_gauge(const Lattice& lattice, const FluxSpec& spec,
                            double cut_angle);

// sum over links of a(s -> s'); the lattice divergence at every site.
std::vector<double> lattice_divergence(const FieldConfig& c);

// Coulomb gauge with lambda = 0 on the lattice boundary: solves
// Laplacian(lambda) = -div(a) at interior sites. Open lattices only.
FieldConfig coulomb_gauge_fix(const FieldConfig& c, double tol = 1e-10,
                              int max_iter = -1);

// lambda = -arg psi: psi becomes real positive and the links become -d.
FieldConfig unitary_gauge_fix(const FieldConfig& c, double eps = kDefaultEps);

}  // namespace abfield
