#include <gtest/gtest.h>

#include <numbers>

#include "abfield/error.hpp"
#include "abfield/holonomy.hpp"
#include "abfield/phase.hpp"
#include "abfield/rng.hpp"
#include "fixtures.hpp"

using namespace abfield;

namespace {

const Lattice kLat = Lattice::build(16, 14, 1.0, Boundary::Open);

}  // namespace

TEST(Holonomy, SumsSignedLinks) {
  FieldConfig c(kLat);
  c.links[kLat.horizontal_link(0, 0)] = 0.1;
  c.links[kLat.vertical_link(1, 0)] = 0.2;
  c.links[kLat.horizontal_link(0, 1)] = 0.4;
  c.links[kLat.vertical_link(0, 0)] = 0.8;
  const auto h = holonomy(c, rectangle_loop(kLat, 0, 0, 1, 1));
  EXPECT_NEAR(h.raw, 0.1 + 0.2 - 0.4 - 0.8, 1e-15);
  EXPECT_NEAR(plaquette_flux(c, kLat.plaquette(0, 0)), h.raw, 1e-15);
}

TEST(Holonomy, GaugeInvariant) {
  Rng rng(3);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto c = random_config(kLat, seed, 0.1);
    const auto c2 = apply_gauge(c, random_gauge(kLat, seed + 50, 7.0));
    const Loop loop = fixtures::random_closed_walk(kLat, rng, 30);
    EXPECT_LT(circular_distance(holonomy(c, loop).raw, holonomy(c2, loop).raw), 1e-12);
    EXPECT_NEAR(holonomy(c, loop).raw, holonomy(c2, loop).raw, 1e-11);
  }
}

TEST(Holonomy, StokesOnRandomLoops) {
  Rng rng(8);
  const auto c = random_config(kLat, 1, 0.1);
  for (int i = 0; i < 200; ++i) {
    const Loop loop = fixtures::random_closed_walk(kLat, rng, 10 + rng.below(60));
    EXPECT_LT(stokes_residual(c, loop), 1e-10);
  }
}

TEST(Holonomy, ReversalNegates) {
  const auto c = random_config(kLat, 4, 0.1);
  const auto loop = rectangle_loop(kLat, 2, 3, 9, 8);
  EXPECT_NEAR(holonomy(c, reversed(kLat, loop)).raw, -holonomy(c, loop).raw, 1e-12);
}

TEST(Solenoid, LayoutTouchesExcisedSites) {
  const auto layout = solenoid_layout(kLat, {7.5, 6.5, 1.2, 1.0});
  EXPECT_EQ(layout.excised_sites.size(), 4u);
  EXPECT_EQ(layout.flux_plaquettes.size(), 9u);
  const auto thin = solenoid_layout(kLat, {7.5, 6.5, 0.6, 1.0});
  EXPECT_TRUE(thin.excised_sites.empty());
  EXPECT_EQ(thin.flux_plaquettes, std::vector<int>{kLat.plaquette(7, 6)});
  EXPECT_THROW(solenoid_layout(kLat, {0.5, 0.5, 0.6, 1.0}), Error);
  EXPECT_THROW(solenoid_layout(kLat, {7.3, 6.1, 0.01, 1.0}), Error);
}

TEST(Solenoid, FluxIsConfinedAndEnclosedFully) {
  const double flux = 1.3;
  const auto c = solenoid_config(kLat, {7.5, 6.5, 1.6, flux}, Complex{1.0, 0.0});
  const auto layout = solenoid_layout(kLat, {7.5, 6.5, 1.6, flux});
  double total = 0.0;
  for (int p = 0; p < kLat.plaquette_count(); ++p) {
    const double f = plaquette_flux(c, p);
    const bool inside = std::find(layout.flux_plaquettes.begin(), layout.flux_plaquettes.end(),
                                  p) != layout.flux_plaquettes.end();
    if (!inside) EXPECT_NEAR(f, 0.0, 1e-12) << p;
    total += f;
  }
  EXPECT_NEAR(total, flux, 1e-12);
  for (int r = 0; r < 4; ++r) {
    const auto loop = rectangle_loop(kLat, 4 - r, 3 - r, 11 + r, 10 + r);
    EXPECT_NEAR(holonomy(c, loop).raw, flux, 1e-12);
    EXPECT_THROW(stokes_residual(c, loop), Error);
  }
  EXPECT_NEAR(holonomy(c, rectangle_loop(kLat, 0, 0, 3, 12)).raw, 0.0, 1e-12);
  EXPECT_NEAR(stokes_residual(c, rectangle_loop(kLat, 0, 0, 3, 12)), 0.0, 1e-12);
}

TEST(Solenoid, StringGaugeClearsFieldOffTheCut) {
  const FluxSpec spec{7.5, 6.5, 1.6, 2.1};
  const auto c = solenoid_config(kLat, spec, Complex{1.0, 0.0});
  const double cut = std::numbers::pi / 2.0;
  const auto s = apply_gauge(c, string_gauge(c.lattice, spec, cut));
  const auto& lat = s.lattice;
  for (int l = 0; l < lat.link_count(); ++l) {
    if (!lat.link_active(l)) continue;
    const auto e = lat.link_ends(l);
    if (lat.site_y(e.tail) <= 4 || lat.site_y(e.head) <= 4) EXPECT_NEAR(s.links[l], 0.0, 1e-12);
  }
  EXPECT_NEAR(holonomy(s, rectangle_loop(kLat, 2, 1, 13, 12)).raw, 2.1, 1e-12);
  EXPECT_TRUE(gauge_equivalent(c, s));
}

TEST(GaugeFix, CoulombMakesDivergenceVanish) {
  const auto c = random_config(kLat, 6, 0.2);
  const auto fixed = coulomb_gauge_fix(c, 1e-10);
  const auto div = lattice_divergence(fixed);
  for (int s = 0; s < kLat.site_count(); ++s) {
    if (!kLat.on_boundary(s)) EXPECT_LT(std::abs(div[s]), 1e-10);
  }
  EXPECT_TRUE(gauge_equivalent(c, fixed, kDefaultEps, 1e-8));
  EXPECT_THROW(coulomb_gauge_fix(random_config(Lattice::build(5, 5, 1.0, Boundary::Periodic), 1, 0.1)),
               Error);
}

TEST(GaugeFix, UnitaryMatchesInvariants) {
  const auto c = random_config(kLat, 7, 0.2);
  const auto u = unitary_gauge_fix(c);
  const auto inv = extract_invariants(c);
  for (int s = 0; s < kLat.site_count(); ++s) {
    EXPECT_EQ(u.psi[s].imag(), 0.0);
    EXPECT_NEAR(u.psi[s].real(), inv.rho[s], 1e-14);
  }
  for (int l = 0; l < kLat.link_count(); ++l) {
    EXPECT_LT(circular_distance(u.links[l], -inv.d[l]), 1e-12);
  }
}
