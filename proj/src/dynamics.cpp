#include "abfield/dynamics.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "abfield/error.hpp"
#include "abfield/phase.hpp"

namespace abfield {

namespace {

using SpMat = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using Vec = Eigen::VectorXcd;

double hopping(const Lattice& lat, double mass) {
  return 1.0 / (2.0 * mass * lat.spacing() * lat.spacing());
}

SpMat hamiltonian_matrix(const FieldConfig& c, double mass) {
  const Lattice& lat = c.lattice;
  const double t = hopping(lat, mass);
  std::vector<Eigen::Triplet<Complex>> entries;
  entries.reserve(5 * static_cast<std::size_t>(lat.site_count()));
  for (int s = 0; s < lat.site_count(); ++s) {
    if (!lat.active(s)) continue;
    double diag = 0.0;
    for (Direction d : kAllDirections) {
      const auto st = lat.step(s, d);
      if (!st) continue;
      diag += t;
      if (lat.active(st->head)) {
        entries.emplace_back(s, st->head, -t * std::polar(1.0, -st->sign * c.links[st->link]));
      }
    }
    entries.emplace_back(s, s, Complex{diag, 0.0});
  }
  SpMat h(lat.site_count(), lat.site_count());
  h.setFromTriplets(entries.begin(), entries.end());
  return h;
}

std::vector<double> absorber_mask(const Lattice& lat, const Absorber& a) {
  std::vector<double> mask(lat.site_count(), 1.0);
  if (a.width <= 0 || a.strength == 0.0) return mask;
  for (int s = 0; s < lat.site_count(); ++s) {
    const int x = lat.site_x(s), y = lat.site_y(s);
    const int dist = std::min({x, lat.nx() - 1 - x, y, lat.ny() - 1 - y});
    const double u = std::clamp((a.width - dist) / static_cast<double>(a.width), 0.0, 1.0);
    const double sn = std::sin(0.5 * std::numbers::pi * u);
    mask[s] = 1.0 - a.strength * sn * sn;
  }
  return mask;
}

}  // namespace

void validate(const EvolutionParams& p) {
  if (!(p.mass > 0.0) || !std::isfinite(p.mass)) throw_invalid("mass must be positive");
  if (!(p.dt > 0.0) || !std::isfinite(p.dt)) throw_invalid("dt must be positive");
  if (p.steps <= 0) throw_invalid("steps must be positive");
  if (!(p.solver_tol > 0.0)) throw_invalid("solver_tol must be positive");
  if (p.max_iterations <= 0) throw_invalid("max_iterations must be positive");
  if (p.absorber) {
    if (p.absorber->width < 0) throw_invalid("absorber width must be nonnegative");
    if (!(p.absorber->strength >= 0.0 && p.absorber->strength < 1.0)) {
      throw_invalid("absorber strength must lie in [0, 1)");
    }
  }
}

std::vector<Complex> hamiltonian_apply(const FieldConfig& c, std::span<const Complex> psi,
                                       double mass) {
  const Lattice& lat = c.lattice;
  if (psi.size() != static_cast<std::size_t>(lat.site_count())) {
    throw_invalid("hamiltonian_apply: field size does not match the lattice");
  }
  if (!(mass > 0.0)) throw_invalid("mass must be positive");
  const double t = hopping(lat, mass);
  std::vector<Complex> out(psi.size(), Complex{0.0, 0.0});
  for (int s = 0; s < lat.site_count(); ++s) {
    if (!lat.active(s)) continue;
    Complex acc{0.0, 0.0};
    for (Direction d : kAllDirections) {
      const auto st = lat.step(s, d);
      if (!st) continue;
      const Complex neighbour =
          lat.active(st->head) ? std::polar(1.0, -st->sign * c.links[st->link]) * psi[st->head]
                               : Complex{0.0, 0.0};
      acc += neighbour - psi[s];
    }
    out[s] = -t * acc;
  }
  return out;
}

std::vector<Complex> hamiltonian_apply(const FieldConfig& c, double mass) {
  return hamiltonian_apply(c, c.psi, mass);
}

double total_probability(const Lattice& lattice, std::span<const Complex> psi) {
  double sum = 0.0;
  for (const auto& p : psi) sum += std::norm(p);
  return sum * lattice.spacing() * lattice.spacing();
}

struct CrankNicolson::Impl {
  SpMat lhs;
  SpMat rhs;
  Eigen::BiCGSTAB<SpMat, Eigen::DiagonalPreconditioner<Complex>> solver;
  std::vector<double> mask;
  bool damp = false;
};

CrankNicolson::CrankNicolson(const FieldConfig& c, const EvolutionParams& params)
    : impl_(std::make_unique<Impl>()) {
  validate(params);
  const SpMat h = hamiltonian_matrix(c, params.mass);
  SpMat id(h.rows(), h.cols());
  id.setIdentity();
  const Complex half{0.0, 0.5 * params.dt};
  impl_->lhs = id + half * h;
  impl_->rhs = id - half * h;
  impl_->solver.setTolerance(params.solver_tol);
  impl_->solver.setMaxIterations(params.max_iterations);
  impl_->solver.compute(impl_->lhs);
  if (params.absorber) {
    impl_->mask = absorber_mask(c.lattice, *params.absorber);
    impl_->damp = true;
  }
}

CrankNicolson::~CrankNicolson() = default;
CrankNicolson::CrankNicolson(CrankNicolson&&) noexcept = default;
CrankNicolson& CrankNicolson::operator=(CrankNicolson&&) noexcept = default;

void CrankNicolson::step(std::vector<Complex>& psi) {
  if (psi.size() != static_cast<std::size_t>(impl_->lhs.rows())) {
    throw_invalid("Crank-Nicolson step: field size does not match the lattice");
  }
  Eigen::Map<Vec> x(psi.data(), static_cast<Eigen::Index>(psi.size()));
  const Vec b = impl_->rhs * x;
  if (b.squaredNorm() == 0.0) return;
  const Vec guess = x;
  x = impl_->solver.solveWithGuess(b, guess);
  last_iterations_ = static_cast<int>(impl_->solver.iterations());
  last_residual_ = impl_->solver.error();
  if (impl_->solver.info() != Eigen::Success) {
    throw ConvergenceError("Crank-Nicolson BiCGSTAB solve", last_iterations_, last_residual_);
  }
  if (impl_->damp) {
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= impl_->mask[i];
  }
}

std::vector<Complex> step_crank_nicolson(std::span<const Complex> psi, const FieldConfig& c,
                                         const EvolutionParams& params) {
  CrankNicolson cn(c, params);
  std::vector<Complex> out(psi.begin(), psi.end());
  cn.step(out);
  return out;
}

std::vector<Complex> gaussian_packet(const Lattice& lattice, const PacketSpec& spec) {
  const double h = lattice.spacing();
  if (!(spec.width >= 2.0 * h)) {
    throw_invalid("packet width must be at least two lattice spacings");
  }
  std::vector<Complex> psi(lattice.site_count(), Complex{0.0, 0.0});
  for (int s = 0; s < lattice.site_count(); ++s) {
    if (!lattice.active(s)) continue;
    const double x = lattice.site_x(s) * h, y = lattice.site_y(s) * h;
    const double r2 = (x - spec.center_x) * (x - spec.center_x) +
                      (y - spec.center_y) * (y - spec.center_y);
    psi[s] = std::polar(std::exp(-r2 / (4.0 * spec.width * spec.width)),
                        spec.momentum_x * x + spec.momentum_y * y);
  }
  const double norm = total_probability(lattice, psi);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw_invalid("packet has no weight on the active lattice");
  }
  const double scale = 1.0 / std::sqrt(norm);
  for (auto& p : psi) p *= scale;
  return psi;
}

void validate(const AbGeometry& g) {
  if (g.nx < 8 || g.ny < 8) throw_invalid("A-B lattice too small");
  if (!(g.spacing > 0.0)) throw_invalid("spacing must be positive");
  if (g.barrier_thickness < 1) throw_invalid("barrier thickness must be positive");
  if (g.barrier_row < 1 || g.barrier_row + g.barrier_thickness >= g.ny) {
    throw_invalid("barrier rows outside the lattice");
  }
  if (g.slit_width < 1) throw_invalid("slit width must be positive");
  if (!(g.slit_separation > g.slit_width)) {
    throw_invalid("slit separation must exceed the slit width");
  }
  if (g.axis() - 0.5 * g.slit_separation - 0.5 * g.slit_width < 0.0) {
    throw_invalid("slits do not fit on the lattice");
  }
  if (!(g.solenoid_y - g.solenoid_radius > g.barrier_row + g.barrier_thickness - 1)) {
    throw_invalid("solenoid must lie beyond the barrier");
  }
  if (!(g.solenoid_radius >= 0.0)) throw_invalid("solenoid radius must be nonnegative");
  if (g.screen_row <= g.solenoid_y + g.solenoid_radius || g.screen_row >= g.ny - 1) {
    throw_invalid("screen row must lie beyond the solenoid and inside the lattice");
  }
  if (!(g.fit_k_min > 0.0 && g.fit_k_max > g.fit_k_min)) {
    throw_invalid("fringe wavenumber range must be increasing and positive");
  }
}

AbGeometry default_ab_geometry() { return AbGeometry{}; }

EvolutionParams default_ab_params() {
  EvolutionParams p;
  p.mass = 1.0;
  p.dt = 0.5;
  p.steps = 700;
  p.solver_tol = 1e-10;
  p.absorber = Absorber{20, 0.1};
  return p;
}

PacketSpec default_ab_packet() { return PacketSpec{95.5, 70.0, 20.0, 0.0, 1.0}; }

FluxSpec ab_flux_spec(const AbGeometry& g, double e_flux) {
  return FluxSpec{g.axis(), g.solenoid_y, g.solenoid_radius, e_flux};
}

FieldConfig ab_config(const AbGeometry& g, double e_flux) {
  validate(g);
  const Lattice base = Lattice::build(g.nx, g.ny, g.spacing, Boundary::Open);
  const double left = g.axis() - 0.5 * g.slit_separation;
  const double right = g.axis() + 0.5 * g.slit_separation;
  std::vector<int> wall;
  for (int y = g.barrier_row; y < g.barrier_row + g.barrier_thickness; ++y) {
    for (int x = 0; x < g.nx; ++x) {
      const bool open = std::abs(x - left) < 0.5 * g.slit_width ||
                        std::abs(x - right) < 0.5 * g.slit_width;
      if (!open) wall.push_back(base.site(x, y));
    }
  }
  const FluxSpec spec = ab_flux_spec(g, e_flux);
  const FieldConfig c = solenoid_config(base.with_excised(wall), spec, Complex{1.0, 0.0});
  return apply_gauge(c, string_gauge(c.lattice, spec, 0.5 * std::numbers::pi));
}

AbRun run_ab(const AbGeometry& g, double e_flux, const EvolutionParams& params,
             const PacketSpec& packet) {
  const FieldConfig c = ab_config(g, e_flux);
  const Lattice& lat = c.lattice;
  std::vector<Complex> psi = gaussian_packet(lat, packet);
  const int barrier = lat.site(0, g.barrier_row);
  std::fill(psi.begin() + barrier, psi.end(), Complex{0.0, 0.0});
  const double source = total_probability(lat, psi);
  if (!(source > 0.0)) throw_invalid("packet has no weight on the source side of the barrier");
  for (auto& p : psi) p /= std::sqrt(source);
  CrankNicolson cn(c, params);
  const int beyond = lat.site(0, g.barrier_row + g.barrier_thickness);
  const double h2 = lat.spacing() * lat.spacing();

  AbRun out;
  out.intensity.assign(g.nx, 0.0);
  out.observables.reserve(params.steps);
  double accumulated = 0.0;
  for (int n = 1; n <= params.steps; ++n) {
    cn.step(psi);
    double norm = 0.0, transmitted = 0.0;
    for (int s = 0; s < lat.site_count(); ++s) {
      const double p = std::norm(psi[s]);
      norm += p;
      if (s >= beyond) transmitted += p;
    }
    for (int x = 0; x < g.nx; ++x) {
      const double p = std::norm(psi[lat.site(x, g.screen_row)]) * params.dt;
      out.intensity[x] += p;
      accumulated += p;
    }
    out.transmitted = std::max(out.transmitted, transmitted * h2);
    out.observables.push_back({n, norm * h2, accumulated, transmitted * h2});
  }
  if (out.transmitted < 1e-4) {
    std::ostringstream os;
    os << "packet never reached the screen: largest transmitted probability "
       << out.transmitted << " < 1e-4 after " << params.steps << " steps (final norm "
       << (out.observables.empty() ? 0.0 : out.observables.back().norm) << ")";
    throw Error(ErrorCode::ExperimentFailure, os.str());
  }
  return out;
}

namespace {

struct FitAt {
  double quality;
  double a;
  double b;
};

FitAt fit_at(std::span<const double> intensity, double axis, double k) {
  const int n = static_cast<int>(intensity.size());
  const int lo = n / 4, hi = n - n / 4;
  const double period = 2.0 * std::numbers::pi / k;
  const int half = 3 * std::max(3, static_cast<int>(std::lround(period)));
  double scc = 0, sss = 0, scs = 0, src = 0, srs = 0, srr = 0;
  for (int i = lo; i < hi; ++i) {
    double num = 0.0, den = 0.0;
    for (int j = std::max(0, i - half); j <= std::min(n - 1, i + half); ++j) {
      const double z = (j - i) / period;
      const double w = std::exp(-0.5 * z * z);
      num += w * intensity[j];
      den += w;
    }
    const double env = num / den;
    if (!(env > 0.0)) return {-1.0, 0.0, 0.0};
    const double r = intensity[i] / env - 1.0;
    const double u = axis - i;
    const double cs = std::cos(k * u), sn = std::sin(k * u);
    scc += cs * cs;
    sss += sn * sn;
    scs += cs * sn;
    src += r * cs;
    srs += r * sn;
    srr += r * r;
  }
  const double det = scc * sss - scs * scs;
  if (!(std::abs(det) > 0.0) || !(srr > 0.0)) return {-1.0, 0.0, 0.0};
  const double a = (src * sss - srs * scs) / det;
  const double b = (srs * scc - src * scs) / det;
  const double explained = a * src + b * srs;
  return {explained / srr, a, b};
}

}  // namespace

FringeFit fit_fringes(std::span<const double> intensity, double axis,
                      std::optional<double> wavenumber, double k_min, double k_max) {
  if (intensity.size() < 8) throw_invalid("screen too short for a fringe fit");
  double k = 0.0;
  if (wavenumber) {
    k = *wavenumber;
  } else {
    constexpr int kGrid = 1601;
    const double step = (k_max - k_min) / (kGrid - 1);
    double best = -2.0;
    for (int i = 0; i < kGrid; ++i) {
      const double kk = k_min + step * i;
      const double q = fit_at(intensity, axis, kk).quality;
      if (q > best) {
        best = q;
        k = kk;
      }
    }
    double lo = std::max(k_min, k - step), hi = std::min(k_max, k + step);
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 40; ++it) {
      const double m1 = hi - ratio * (hi - lo), m2 = lo + ratio * (hi - lo);
      if (fit_at(intensity, axis, m1).quality >= fit_at(intensity, axis, m2).quality) hi = m2;
      else lo = m1;
    }
    const double refined = 0.5 * (lo + hi);
    if (fit_at(intensity, axis, refined).quality >= best) k = refined;
  }
  if (!(k > 0.0)) throw_invalid("fringe wavenumber must be positive");
  const FitAt f = fit_at(intensity, axis, k);
  if (f.quality < -0.5) {
    throw Error(ErrorCode::ExperimentFailure,
                "fringe fit failed: screen intensity vanishes inside the fit window");
  }
  return FringeFit{std::atan2(-f.b, f.a), k, std::hypot(f.a, f.b), std::clamp(f.quality, 0.0, 1.0)};
}

AbReference ab_reference(const AbGeometry& g, const EvolutionParams& params,
                         const PacketSpec& packet) {
  AbReference ref{run_ab(g, 0.0, params, packet), {}};
  ref.fit = fit_fringes(ref.run.intensity, g.axis(), std::nullopt, g.fit_k_min, g.fit_k_max);
  return ref;
}

FringeResult ab_experiment(const AbGeometry& g, double e_flux, const EvolutionParams& params,
                           const PacketSpec& packet, const AbReference* reference) {
  std::optional<AbReference> own;
  if (!reference) {
    own = ab_reference(g, params, packet);
    reference = &*own;
  }
  AbRun run = e_flux == 0.0 ? reference->run : run_ab(g, e_flux, params, packet);
  const FringeFit fit =
      fit_fringes(run.intensity, g.axis(), reference->fit.wavenumber, g.fit_k_min, g.fit_k_max);
  FringeResult out;
  out.screen_row = g.screen_row;
  out.e_flux = e_flux;
  out.intensity = std::move(run.intensity);
  out.extracted_shift = wrap_phase(fit.phase - reference->fit.phase);
  out.fit_quality = fit.quality;
  out.wavenumber = fit.wavenumber;
  out.transmitted = run.transmitted;
  out.observables = std::move(run.observables);
  return out;
}

double predicted_shift(double e_flux) { return wrap_phase(e_flux); }

StaticCheck unitary_gauge_static_check(const FieldConfig& c, double eps) {
  const InvariantState inv = extract_invariants(c, eps);
  const Lattice& lat = c.lattice;
  const double inv_h2 = 1.0 / (lat.spacing() * lat.spacing());
  StaticCheck out;
  for (int s = 0; s < lat.site_count(); ++s) {
    if (!lat.active(s)) continue;
    double real_part = 0.0, imag_part = 0.0;
    for (Direction d : kAllDirections) {
      const auto st = lat.step(s, d);
      if (!st) continue;
      const double rho_n = lat.active(st->head) ? inv.rho[st->head] : 0.0;
      const double a = -st->sign * inv.d[st->link];
      real_part += std::cos(a) * rho_n - inv.rho[s];
      imag_part += std::sin(a) * rho_n;
    }
    out.res1 = std::max(out.res1, std::abs(real_part) * inv_h2);
    out.res2 = std::max(out.res2, std::abs(imag_part) * inv_h2);
  }
  return out;
}

}  // namespace abfield
