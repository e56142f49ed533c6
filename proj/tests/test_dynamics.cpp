#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <numbers>

#include "abfield/dynamics.hpp"
#include "abfield/error.hpp"
#include "abfield/phase.hpp"
#include "abfield/rng.hpp"

using namespace abfield;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Complex> random_field(const Lattice& lat, std::uint64_t seed) {
  return random_config(lat, seed, 0.1).psi;
}

Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double max_abs_diff(std::span<const Complex> a, std::span<const Complex> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Dense H built column by column from hamiltonian_apply, restricted to active sites.
Eigen::MatrixXcd dense_hamiltonian(const FieldConfig& c, double mass) {
  const int n = c.lattice.site_count();
  Eigen::MatrixXcd h(n, n);
  std::vector<Complex> e(n);
  for (int j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), Complex{0.0, 0.0});
    e[j] = 1.0;
    const auto col = hamiltonian_apply(c, e, mass);
    for (int i = 0; i < n; ++i) h(i, j) = col[i];
  }
  return h;
}

FieldConfig flux_config() {
  const auto lat = Lattice::build(9, 8, 0.5, Boundary::Open);
  return solenoid_config(lat, {4.0, 3.5, 1.1, 1.7}, Complex{1.0, 0.0});
}

EvolutionParams unitary_params(double dt) {
  EvolutionParams p;
  p.mass = 1.3;
  p.dt = dt;
  p.steps = 1;
  p.solver_tol = 1e-13;
  return p;
}

AbGeometry small_geometry() {
  AbGeometry g;
  g.nx = 96;
  g.ny = 128;
  g.barrier_row = 60;
  g.slit_width = 4;
  g.slit_separation = 20.0;
  g.solenoid_y = 72.5;
  g.solenoid_radius = 2.0;
  g.screen_row = 110;
  return g;
}

PacketSpec small_packet() { return PacketSpec{47.5, 32.0, 10.0, 0.0, 1.0}; }

EvolutionParams small_params() {
  EvolutionParams p = default_ab_params();
  p.steps = 300;
  p.absorber = Absorber{12, 0.1};
  return p;
}

}  // namespace

TEST(Hamiltonian, ConstantFieldOnPeriodicLatticeIsAnnihilated) {
  const auto lat = Lattice::build(8, 6, 0.7, Boundary::Periodic);
  FieldConfig c(lat);
  for (auto& p : c.psi) p = {0.3, -1.2};
  for (const auto& v : hamiltonian_apply(c, 2.0)) EXPECT_EQ(std::abs(v), 0.0);
}

TEST(Hamiltonian, PlaneWaveDispersion) {
  const int nx = 12, ny = 10;
  const double h = 0.5, mass = 0.8;
  const auto lat = Lattice::build(nx, ny, h, Boundary::Periodic);
  FieldConfig c(lat);
  for (int mx : {0, 1, 5}) {
    for (int my : {0, 3, 7}) {
      const double kx = 2.0 * kPi * mx / (nx * h), ky = 2.0 * kPi * my / (ny * h);
      for (int s = 0; s < lat.site_count(); ++s) {
        c.psi[s] = std::polar(1.0, kx * lat.site_x(s) * h + ky * lat.site_y(s) * h);
      }
      const double e = (2.0 - std::cos(kx * h) - std::cos(ky * h)) / (mass * h * h);
      const auto hp = hamiltonian_apply(c, mass);
      for (int s = 0; s < lat.site_count(); ++s) EXPECT_LT(std::abs(hp[s] - e * c.psi[s]), 1e-12);
    }
  }
}

TEST(Hamiltonian, GaugeCovariant) {
  for (auto b : {Boundary::Open, Boundary::Periodic}) {
    const auto lat = Lattice::build(10, 9, 1.0, b);
    const auto c = random_config(lat, 4, 0.1);
    const auto g = random_gauge(lat, 5, 6.0);
    const auto cg = apply_gauge(c, g);
    const auto lhs = hamiltonian_apply(cg, 1.0);
    auto rhs = hamiltonian_apply(c, 1.0);
    for (int s = 0; s < lat.site_count(); ++s) rhs[s] *= std::polar(1.0, g.lambda[s]);
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-12);
  }
}

TEST(Hamiltonian, Hermitian) {
  const auto c = flux_config();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto phi = random_field(c.lattice, seed);
    const auto psi = random_field(c.lattice, seed + 100);
    const auto lhs = inner(phi, hamiltonian_apply(c, psi, 1.0));
    const auto rhs = std::conj(inner(psi, hamiltonian_apply(c, phi, 1.0)));
    EXPECT_LT(std::abs(lhs - rhs), 1e-12);
  }
}

TEST(Hamiltonian, ExcisedSitesAreHardWalls) {
  const auto c = flux_config();
  auto psi = random_field(c.lattice, 1);
  const auto hp = hamiltonian_apply(c, psi, 1.0);
  for (int s = 0; s < c.lattice.site_count(); ++s) {
    if (!c.lattice.active(s)) EXPECT_EQ(hp[s], Complex(0.0));
  }
}

TEST(CrankNicolson, SolvesTheImplicitSystem) {
  const auto c = flux_config();
  const auto p = unitary_params(0.05);
  const auto psi = gaussian_packet(c.lattice, {2.0, 2.0, 1.0, 1.0, 0.5});
  const auto next = step_crank_nicolson(psi, c, p);
  const auto h0 = hamiltonian_apply(c, psi, p.mass);
  const auto h1 = hamiltonian_apply(c, next, p.mass);
  const Complex half{0.0, 0.5 * p.dt};
  double worst = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    worst = std::max(worst, std::abs(next[i] + half * h1[i] - psi[i] + half * h0[i]));
  }
  EXPECT_LT(worst, 1e-11);
}

TEST(CrankNicolson, TinyStepIsContinuous) {
  const auto c = flux_config();
  const auto psi = gaussian_packet(c.lattice, {2.0, 2.0, 1.0, 1.0, 0.5});
  const auto next = step_crank_nicolson(psi, c, unitary_params(1e-12));
  EXPECT_LE(max_abs_diff(psi, next), 1e-10 * std::sqrt(inner(psi, psi).real()));
}

TEST(CrankNicolson, EigenstateAcquiresCayleyPhase) {
  const auto c = flux_config();
  const double mass = 1.3;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(dense_hamiltonian(c, mass));
  for (double dt : {0.01, 0.2}) {
    const auto p = unitary_params(dt);
    CrankNicolson cn(c, p);
    for (int k : {0, 7, 30}) {
      std::vector<Complex> psi(c.lattice.site_count());
      const double e = eig.eigenvalues()[k];
      if (e == 0.0) continue;
      for (int s = 0; s < c.lattice.site_count(); ++s) psi[s] = eig.eigenvectors()(s, k);
      auto next = psi;
      cn.step(next);
      const Complex cayley = (1.0 - Complex(0.0, 0.5 * e * dt)) / (1.0 + Complex(0.0, 0.5 * e * dt));
      for (auto& v : psi) v *= cayley;
      EXPECT_LT(max_abs_diff(next, psi), 1e-10);
      const double ed = e * dt;
      EXPECT_LE(std::abs(cayley - std::polar(1.0, -ed)), ed * ed * ed / 12.0 + 1e-15);
    }
  }
}

TEST(CrankNicolson, ConservesNorm) {
  const auto lat = Lattice::build(20, 18, 1.0, Boundary::Open);
  const auto c = apply_gauge(solenoid_config(lat, {9.5, 8.5, 2.0, 2.3}, 1.0),
                             random_gauge(lat, 3, 1.0));
  auto psi = gaussian_packet(c.lattice, {6.0, 6.0, 2.5, 0.8, 0.4});
  auto p = unitary_params(0.3);
  CrankNicolson cn(c, p);
  const double n0 = total_probability(c.lattice, psi);
  for (int i = 0; i < 300; ++i) cn.step(psi);
  EXPECT_LT(std::abs(total_probability(c.lattice, psi) - n0), 1e-10);
}

TEST(CrankNicolson, EvolutionIsGaugeCovariant) {
  const auto lat = Lattice::build(16, 16, 1.0, Boundary::Open);
  const auto c = random_config(lat, 8, 0.1);
  const auto g = random_gauge(lat, 9, 10.0);
  const auto cg = apply_gauge(c, g);
  auto psi = gaussian_packet(lat, {7.0, 7.0, 2.0, 0.5, -0.3});
  auto psig = psi;
  for (int s = 0; s < lat.site_count(); ++s) psig[s] *= std::polar(1.0, g.lambda[s]);
  const auto p = unitary_params(0.4);
  CrankNicolson a(c, p), b(cg, p);
  for (int i = 0; i < 100; ++i) {
    a.step(psi);
    b.step(psig);
  }
  for (int s = 0; s < lat.site_count(); ++s) psi[s] *= std::polar(1.0, g.lambda[s]);
  EXPECT_LT(max_abs_diff(psi, psig), 1e-9);
}

TEST(CrankNicolson, AbsorberDampsEdges) {
  const auto lat = Lattice::build(24, 24, 1.0, Boundary::Open);
  const FieldConfig c(lat);
  auto p = unitary_params(0.5);
  p.absorber = Absorber{6, 0.2};
  auto psi = gaussian_packet(lat, {3.0, 12.0, 2.0, -1.0, 0.0});
  CrankNicolson cn(c, p);
  for (int i = 0; i < 40; ++i) cn.step(psi);
  EXPECT_LT(total_probability(lat, psi), 0.5);
  p.absorber = Absorber{6, 1.5};
  EXPECT_THROW(CrankNicolson(c, p), Error);
}

TEST(Packet, NormalisedAndCentred) {
  const auto lat = Lattice::build(128, 128, 0.5, Boundary::Open);
  const PacketSpec spec{30.3, 25.8, 4.0, 0.0, 0.0};
  const auto psi = gaussian_packet(lat, spec);
  EXPECT_NEAR(total_probability(lat, psi), 1.0, 1e-12);
  double mx = 0.0, my = 0.0;
  for (int s = 0; s < lat.site_count(); ++s) {
    EXPECT_EQ(psi[s].imag(), 0.0);
    EXPECT_GE(psi[s].real(), 0.0);
    mx += std::norm(psi[s]) * lat.site_x(s) * 0.5 * 0.25;
    my += std::norm(psi[s]) * lat.site_y(s) * 0.5 * 0.25;
  }
  EXPECT_NEAR(mx, spec.center_x, 0.05);
  EXPECT_NEAR(my, spec.center_y, 0.05);
  EXPECT_THROW(gaussian_packet(lat, {30.0, 30.0, 0.9, 0.0, 0.0}), Error);
}

TEST(Packet, CarriesMomentum) {
  const auto lat = Lattice::build(64, 64, 1.0, Boundary::Open);
  const auto psi = gaussian_packet(lat, {32.0, 32.0, 6.0, 0.0, 0.7});
  const int s = lat.site(32, 32);
  const auto up = psi[lat.site(32, 33)];
  EXPECT_NEAR(std::arg(up / psi[s]), 0.7, 1e-12);
}

TEST(Fringes, RecoversSyntheticPhase) {
  const int n = 160;
  const double axis = 79.5, k = 0.41;
  for (double phi : {0.0, 0.9, -2.5, 3.0}) {
    std::vector<double> intensity(n);
    for (int i = 0; i < n; ++i) {
      const double u = axis - i;
      const double env = std::exp(-u * u / (2.0 * 60.0 * 60.0));
      intensity[i] = env * (1.0 + 0.6 * std::cos(k * u + phi));
    }
    const auto fit = fit_fringes(intensity, axis, std::nullopt);
    EXPECT_NEAR(fit.wavenumber, k, 2e-3);
    EXPECT_LT(circular_distance(fit.phase, phi), 0.03);
    EXPECT_GT(fit.quality, 0.97);
    EXPECT_LE(fit.quality, 1.0);
  }
  EXPECT_THROW(fit_fringes(std::vector<double>(64, 0.0), 31.5, 0.4), Error);
}

TEST(Fringes, PredictedShiftWraps) {
  EXPECT_EQ(predicted_shift(0.0), 0.0);
  EXPECT_NEAR(predicted_shift(2.0 * kPi), 0.0, 1e-15);
  EXPECT_NEAR(predicted_shift(kPi / 2.0), kPi / 2.0, 1e-15);
  EXPECT_NEAR(predicted_shift(7.0), 7.0 - 2.0 * kPi, 1e-15);
}

TEST(StaticCheck, GroundStateWithoutField) {
  const auto lat = Lattice::build(7, 6, 1.0, Boundary::Open);
  FieldConfig c(lat);
  const double mass = 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(dense_hamiltonian(c, mass));
  const double e0 = eig.eigenvalues()[0];
  double rho_max = 0.0;
  for (int s = 0; s < lat.site_count(); ++s) {
    c.psi[s] = std::abs(eig.eigenvectors()(s, 0));
    rho_max = std::max(rho_max, std::abs(c.psi[s]));
  }
  const auto r = unitary_gauge_static_check(c);
  EXPECT_EQ(r.res2, 0.0);
  EXPECT_NEAR(r.res1, 2.0 * mass * e0 * rho_max, 1e-10);
  const auto rg = unitary_gauge_static_check(apply_gauge(c, random_gauge(lat, 2, 5.0)));
  EXPECT_NEAR(rg.res1, r.res1, 1e-10);
  EXPECT_NEAR(rg.res2, r.res2, 1e-10);
}

TEST(StaticCheck, EigenstateWithFlux) {
  auto c = flux_config();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(dense_hamiltonian(c, 1.0));
  // Lowest state supported on the active sites.
  int k = 0;
  while (eig.eigenvalues()[k] == 0.0) ++k;
  for (int s = 0; s < c.lattice.site_count(); ++s) c.psi[s] = eig.eigenvectors()(s, k);
  const auto r = unitary_gauge_static_check(c, 1e-12);
  EXPECT_LT(r.res2, 1e-10);
  EXPECT_GT(r.res1, 0.0);
  const auto rg = unitary_gauge_static_check(apply_gauge(c, random_gauge(c.lattice, 4, 3.0)),
                                             1e-12);
  EXPECT_NEAR(rg.res1, r.res1, 1e-10);
  EXPECT_NEAR(rg.res2, r.res2, 1e-10);
  c.psi[c.lattice.site(0, 0)] = 0.0;
  EXPECT_THROW(unitary_gauge_static_check(c), ZeroFieldError);
}

TEST(AbGeometryTest, LayoutHasSlitsAndSolenoid) {
  const auto g = default_ab_geometry();
  const auto c = ab_config(g, 1.0);
  const auto& lat = c.lattice;
  int open = 0;
  for (int x = 0; x < g.nx; ++x) open += lat.active(lat.site(x, g.barrier_row)) ? 1 : 0;
  EXPECT_EQ(open, 2 * g.slit_width);
  EXPECT_TRUE(lat.active(lat.site(76, 126)));
  EXPECT_TRUE(lat.active(lat.site(116, 126)));
  EXPECT_FALSE(lat.active(lat.site(95, 150)));
  // String gauge leaves the source side free of link phases.
  for (int l = 0; l < lat.link_count(); ++l) {
    const auto e = lat.link_ends(l);
    if (lat.site_y(e.head) < 140) EXPECT_NEAR(c.links[l], 0.0, 1e-12);
  }
  EXPECT_NEAR(holonomy(c, rectangle_loop(lat, 80, 140, 110, 160)).raw, 1.0, 1e-12);
  auto bad = g;
  bad.screen_row = 150;
  EXPECT_THROW(ab_config(bad, 0.0), Error);
}

TEST(AbExperiment, ZeroFluxPatternIsSymmetricAndSelfReferenced) {
  const auto g = small_geometry();
  const auto ref = ab_reference(g, small_params(), small_packet());
  const auto& I = ref.run.intensity;
  double peak = *std::max_element(I.begin(), I.end());
  for (int i = 0; i < g.nx; ++i) EXPECT_NEAR(I[i], I[g.nx - 1 - i], 1e-8 * peak);
  const auto self = ab_experiment(g, 0.0, small_params(), small_packet(), &ref);
  EXPECT_EQ(self.extracted_shift, 0.0);
  EXPECT_GT(ref.run.transmitted, 1e-4);
  ASSERT_EQ(ref.run.observables.size(), 300u);
  EXPECT_LE(ref.run.observables.back().norm, 1.0);
}

TEST(AbExperiment, FluxQuantumIsInvisible) {
  const auto g = small_geometry();
  const auto a = run_ab(g, 0.4, small_params(), small_packet());
  const auto b = run_ab(g, 0.4 + 2.0 * kPi, small_params(), small_packet());
  const double peak = *std::max_element(a.intensity.begin(), a.intensity.end());
  for (int i = 0; i < g.nx; ++i) EXPECT_NEAR(a.intensity[i], b.intensity[i], 1e-7 * peak);
}

TEST(AbExperiment, PacketMissingTheScreenFails) {
  auto p = small_params();
  p.steps = 10;
  PacketSpec away = small_packet();
  away.momentum_y = -1.0;
  try {
    run_ab(small_geometry(), 0.0, p, away);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ExperimentFailure);
  }
}
