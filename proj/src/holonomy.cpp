#include "abfield/holonomy.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "abfield/error.hpp"
#include "abfield/phase.hpp"

namespace abfield {

double path_integral(const FieldConfig& c, std::span<const DirectedLink> path) {
  validate_path(c.lattice, path);
  double sum = 0.0;
  for (const auto& l : path) sum += c.link(l);
  return sum;
}

HolonomyValue holonomy(const FieldConfig& c, const Loop& loop) {
  validate_loop(c.lattice, loop);
  const double raw = path_integral(c, loop.links);
  return {raw, wrap_phase(raw)};
}

double plaquette_flux(const FieldConfig& c, int plaquette) {
  if (plaquette < 0 || plaquette >= c.lattice.plaquette_count()) {
    throw_invalid("plaquette index out of range");
  }
  double sum = 0.0;
  for (const auto& l : c.lattice.plaquette_boundary(plaquette)) sum += c.link(l);
  return sum;
}

double stokes_residual(const FieldConfig& c, const Loop& loop) {
  const auto winding = enclosed_plaquettes(c.lattice, loop);
  double surface = 0.0;
  for (const auto& [p, w] : winding) {
    for (int s : c.lattice.plaquette_corners(p)) {
      if (!c.lattice.active(s)) {
        throw Error(ErrorCode::NotContractible,
                    "loop winds around excised site " + std::to_string(s));
      }
    }
    surface += w * plaquette_flux(c, p);
  }
  return std::abs(holonomy(c, loop).raw - surface);
}

SolenoidLayout solenoid_layout(const Lattice& lattice, const FluxSpec& spec) {
  if (!(spec.radius >= 0.0) || !std::isfinite(spec.radius)) {
    throw_invalid("solenoid radius must be nonnegative");
  }
  if (lattice.periodic()) {
    throw Error(ErrorCode::NotSupported, "solenoids require an open lattice");
  }
  const double r2 = spec.radius * spec.radius;
  auto inside = [&](int s) {
    const double dx = lattice.site_x(s) - spec.center_x;
    const double dy = lattice.site_y(s) - spec.center_y;
    return dx * dx + dy * dy < r2;
  };
  SolenoidLayout out;
  std::vector<std::uint8_t> excised(lattice.site_count(), 0);
  for (int s = 0; s < lattice.site_count(); ++s) {
    if (inside(s)) {
      excised[s] = 1;
      out.excised_sites.push_back(s);
    }
  }
  for (int p = 0; p < lattice.plaquette_count(); ++p) {
    const auto corners = lattice.plaquette_corners(p);
    if (std::any_of(corners.begin(), corners.end(), [&](int s) { return excised[s] != 0; })) {
      out.flux_plaquettes.push_back(p);
    }
  }
  if (out.flux_plaquettes.empty()) {
    for (int p = 0; p < lattice.plaquette_count(); ++p) {
      const double dx = lattice.plaquette_x(p) + 0.5 - spec.center_x;
      const double dy = lattice.plaquette_y(p) + 0.5 - spec.center_y;
      if (dx * dx + dy * dy <= r2) out.flux_plaquettes.push_back(p);
    }
  }
  if (out.flux_plaquettes.empty() && spec.total_flux != 0.0) {
    throw_invalid("solenoid radius selects no plaquette");
  }
  for (int p : out.flux_plaquettes) {
    for (int s : lattice.plaquette_corners(p)) {
      if (lattice.on_boundary(s)) throw_invalid("solenoid touches the lattice boundary");
    }
  }
  return out;
}

namespace {

// Angle of every site as seen from (qx, qy).
std::vector<double> site_angles(const Lattice& lat, double qx, double qy) {
  std::vector<double> out(lat.site_count());
  for (int s = 0; s < lat.site_count(); ++s) {
    out[s] = std::atan2(lat.site_y(s) - qy, lat.site_x(s) - qx);
  }
  return out;
}

}  // namespace

FieldConfig solenoid_config(const Lattice& lattice, const FluxSpec& spec,
                            Complex background) {
  const auto layout = solenoid_layout(lattice, spec);
  FieldConfig c(lattice.with_excised(layout.excised_sites));
  const Lattice& lat = c.lattice;
  for (int s = 0; s < lat.site_count(); ++s) {
    if (lat.active(s)) c.psi[s] = background;
  }
  if (spec.total_flux == 0.0) return c;
  const double per_vortex = spec.total_flux / static_cast<double>(layout.flux_plaquettes.size());
  for (int p : layout.flux_plaquettes) {
    const auto angle = site_angles(lat, lat.plaquette_x(p) + 0.5, lat.plaquette_y(p) + 0.5);
    for (int l = 0; l < lat.link_count(); ++l) {
      const auto e = lat.link_ends(l);
      c.links[l] += per_vortex * wrap_phase(angle[e.head] - angle[e.tail]) / kTwoPi;
    }
  }
  return c;
}

GaugeTransform string_gauge(const Lattice& lattice, const FluxSpec& spec,
                            double cut_angle) {
  GaugeTransform g = GaugeTransform::identity(lattice);
  if (spec.total_flux == 0.0) return g;
  const auto layout = solenoid_layout(lattice, spec);
  const double per_vortex = spec.total_flux / static_cast<double>(layout.flux_plaquettes.size());
  for (int p : layout.flux_plaquettes) {
    const auto angle =
        site_angles(lattice, lattice.plaquette_x(p) + 0.5, lattice.plaquette_y(p) + 0.5);
    for (int s = 0; s < lattice.site_count(); ++s) {
      // Continuous angle on (cut - 2pi, cut].
      const double theta = cut_angle - std::fmod(std::fmod(cut_angle - angle[s], kTwoPi) + kTwoPi, kTwoPi);
      g.lambda[s] -= per_vortex * theta / kTwoPi;
    }
  }
  return g;
}

std::vector<double> lattice_divergence(const FieldConfig& c) {
  const Lattice& lat = c.lattice;
  std::vector<double> div(lat.site_count(), 0.0);
  for (int s = 0; s < lat.site_count(); ++s) {
    for (Direction d : kAllDirections) {
      if (auto st = lat.step(s, d)) div[s] += st->sign * c.links[st->link];
    }
  }
  return div;
}

FieldConfig coulomb_gauge_fix(const FieldConfig& c, double tol, int max_iter) {
  const Lattice& lat = c.lattice;
  if (lat.periodic()) {
    throw Error(ErrorCode::NotSupported, "Coulomb gauge fixing requires an open lattice");
  }
  if (max_iter < 0) max_iter = 10 * lat.site_count();

  std::vector<int> unknown(lat.site_count(), -1);
  std::vector<int> interior;
  for (int s = 0; s < lat.site_count(); ++s) {
    if (!lat.on_boundary(s)) {
      unknown[s] = static_cast<int>(interior.size());
      interior.push_back(s);
    }
  }
  const auto div = lattice_divergence(c);
  const int n = static_cast<int>(interior.size());
  GaugeTransform g = GaugeTransform::identity(lat);
  if (n > 0) {
    // (4 lambda(s) - sum of interior neighbours) = div(s); boundary lambda = 0.
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
      const int s = interior[i];
      trips.emplace_back(i, i, 4.0);
      for (Direction d : kAllDirections) {
        const auto st = lat.step(s, d);
        if (st && unknown[st->head] >= 0) trips.emplace_back(i, unknown[st->head], -1.0);
      }
      rhs[i] = div[s];
    }
    const double bnorm = rhs.norm();
    if (bnorm > 0.0) {
      Eigen::SparseMatrix<double> K(n, n);
      K.setFromTriplets(trips.begin(), trips.end());
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
      cg.setMaxIterations(max_iter);
      cg.setTolerance(std::max(0.25 * tol / bnorm, 1e-16));
      cg.compute(K);
      const Eigen::VectorXd lambda = cg.solve(rhs);
      for (int i = 0; i < n; ++i) g.lambda[interior[i]] = lambda[i];
      const FieldConfig out = apply_gauge(c, g);
      const auto new_div = lattice_divergence(out);
      double worst = 0.0;
      for (int s : interior) worst = std::max(worst, std::abs(new_div[s]));
      if (worst >= tol) {
        std::ostringstream os;
        os << "Coulomb gauge solve did not reach tolerance " << tol << " after "
           << cg.iterations() << " iterations (max |div a| = " << worst << ")";
        throw ConvergenceError(os.str(), static_cast<int>(cg.iterations()), worst);
      }
      return out;
    }
  }
  return c;
}

FieldConfig unitary_gauge_fix(const FieldConfig& c, double eps) {
  require_nonvanishing(c, eps);
  GaugeTransform g = GaugeTransform::identity(c.lattice);
  for (int s = 0; s < c.lattice.site_count(); ++s) {
    if (c.lattice.active(s)) g.lambda[s] = -std::arg(c.psi[s]);
  }
  FieldConfig out = apply_gauge(c, g);
  for (int s = 0; s < c.lattice.site_count(); ++s) {
    if (c.lattice.active(s)) out.psi[s] = Complex{std::abs(c.psi[s]), 0.0};
  }
  return out;
}

}  // namespace abfield
