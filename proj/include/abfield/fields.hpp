#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "abfield/lattice.hpp"

namespace abfield {

using Complex = std::complex<double>;

// Default relative zero threshold: |psi| <= eps * max|psi| counts as zero.
inline constexpr double kDefaultEps = 1e-9;

// Matter field on sites and U(1) link phases. links[l] is the phase for the
// stored orientation of link l (charge folded in, dimensionless); the reverse
// traversal carries -links[l]. Excised sites hold psi = 0.
struct FieldConfig {
  Lattice lattice;
  std::vector<Complex> psi;
  std::vector<double> links;

  explicit FieldConfig(const Lattice& lat)
      : lattice(lat), psi(lat.site_count(), Complex{0.0, 0.0}), links(lat.link_count(), 0.0) {}

  double link(const DirectedLink& l) const {
    const auto st = lattice.resolve(l);
    return st.sign * links[st.link];
  }
};

// Real gauge function on sites (charge folded in).
struct GaugeTransform {
  std::vector<double> lambda;

  static GaugeTransform identity(const Lattice& lat) {
    return GaugeTransform{std::vector<double>(lat.site_count(), 0.0)};
  }
};

// Gauge-invariant content of a configuration: rho = |psi| on sites and the
// covariant phase difference d = arg psi(head) - arg psi(tail) - a on every
// link with both ends active, wrapped into (-pi, pi]. Inactive entries are 0.
struct InvariantState {
  Lattice lattice;
  std::vector<double> rho;
  std::vector<double> d;
};

// psi' = exp(i lambda) psi, a'(s -> s') = a + lambda(s') - lambda(s).
FieldConfig apply_gauge(const FieldConfig& c, const GaugeTransform& g);

// Absolute zero threshold eps * max|psi| over active sites.
double zero_threshold(const FieldConfig& c, double eps);
// Active sites with |psi| <= zero_threshold(c, eps).
std::vector<int> zero_field_sites(const FieldConfig& c, double eps);
// Throws ZeroFieldError if any active site is below threshold.
void require_nonvanishing(const FieldConfig& c, double eps);

InvariantState extract_invariants(const FieldConfig& c, double eps = kDefaultEps);

// Unitary-gauge representative: psi = rho (real, positive), a = -d.
FieldConfig reconstruct(const InvariantState& inv);

// Largest mismatch between two invariant states: |rho| differences and circular
// distance of d on active links.
double invariant_distance(const InvariantState& a, const InvariantState& b);

// Decides whether c2 = apply_gauge(c1, g) for some g (phases compared mod 2pi).
// Requires nonvanishing psi on both. Returns the witness g on success.
std::optional<GaugeTransform> gauge_equivalent(const FieldConfig& c1,
                                               const FieldConfig& c2,
                                               double eps = kDefaultEps,
                                               double tol = 1e-9);

// Same decision with zeros of psi allowed. At zero sites the gauge function is
// unconstrained by psi and is propagated along links from pinned sites; the
// decision is exact in the compact (mod 2pi) sense.
std::optional<GaugeTransform> gauge_equivalent_general(const FieldConfig& c1,
                                                       const FieldConfig& c2,
                                                       double eps = kDefaultEps,
                                                       double tol = 1e-9);

// Largest residual of c2 against apply_gauge(c1, g) over active sites and links.
double gauge_residual(const FieldConfig& c1, const FieldConfig& c2,
                      const GaugeTransform& g);

// Deterministic pseudo-random configuration: |psi| in [rho_min, rho_min + 1),
// phases and links uniform in (-pi, pi].
FieldConfig random_config(const Lattice& lattice, std::uint64_t seed, double rho_min);
GaugeTransform random_gauge(const Lattice& lattice, std::uint64_t seed, double amplitude);

// Field restricted to a region: sites outside the region become excised.
// Link values are kept.
FieldConfig restrict_to(const FieldConfig& c, const Region& region);

}  // namespace abfield
