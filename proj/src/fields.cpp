#include "abfield/fields.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "abfield/error.hpp"
#include "abfield/phase.hpp"
#include "abfield/rng.hpp"

namespace abfield {

namespace {

void require_same_lattice(const Lattice& a, const Lattice& b, const char* what) {
  if (!(a == b)) throw_invalid(std::string(what) + ": lattice mismatch");
}

}  // namespace

FieldConfig apply_gauge(const FieldConfig& c, const GaugeTransform& g) {
  const Lattice& lat = c.lattice;
  if (static_cast<int>(g.lambda.size()) != lat.site_count()) {
    throw_invalid("apply_gauge: gauge transform defined on a different lattice");
  }
  FieldConfig out = c;
  for (int s = 0; s < lat.site_count(); ++s) {
    out.psi[s] = std::polar(1.0, g.lambda[s]) * c.psi[s];
  }
  for (int l = 0; l < lat.link_count(); ++l) {
    const auto e = lat.link_ends(l);
    out.links[l] = c.links[l] + g.lambda[e.head] - g.lambda[e.tail];
  }
  return out;
}

double zero_threshold(const FieldConfig& c, double eps) {
  double peak = 0.0;
  for (int s = 0; s < c.lattice.site_count(); ++s) {
    if (c.lattice.active(s)) peak = std::max(peak, std::abs(c.psi[s]));
  }
  return eps * peak;
}

std::vector<int> zero_field_sites(const FieldConfig& c, double eps) {
  const double thr = zero_threshold(c, eps);
  std::vector<int> out;
  for (int s = 0; s < c.lattice.site_count(); ++s) {
    if (c.lattice.active(s) && std::abs(c.psi[s]) <= thr) out.push_back(s);
  }
  return out;
}

void require_nonvanishing(const FieldConfig& c, double eps) {
  auto zeros = zero_field_sites(c, eps);
  if (!zeros.empty()) throw ZeroFieldError(std::move(zeros), zero_threshold(c, eps));
}

InvariantState extract_invariants(const FieldConfig& c, double eps) {
  require_nonvanishing(c, eps);
  const Lattice& lat = c.lattice;
  InvariantState inv{lat, std::vector<double>(lat.site_count(), 0.0),
                     std::vector<double>(lat.link_count(), 0.0)};
  for (int s = 0; s < lat.site_count(); ++s) {
    if (lat.active(s)) inv.rho[s] = std::abs(c.psi[s]);
  }
  for (int l = 0; l < lat.link_count(); ++l) {
    const auto e = lat.link_ends(l);
    if (!lat.active(e.tail) || !lat.active(e.head)) continue;
    inv.d[l] = wrap_phase(std::arg(c.psi[e.head]) - std::arg(c.psi[e.tail]) - c.links[l]);
  }
  return inv;
}

FieldConfig reconstruct(const InvariantState& inv) {
  const Lattice& lat = inv.lattice;
  FieldConfig out(lat);
  for (int s = 0; s < lat.site_count(); ++s) {
    if (!lat.active(s)) continue;
    if (!(inv.rho[s] > 0.0)) {
      throw_invalid("reconstruct: rho must be positive at site " + std::to_string(s));
    }
    out.psi[s] = Complex{inv.rho[s], 0.0};
  }
  for (int l = 0; l < lat.link_count(); ++l) {
    if (lat.link_active(l)) out.links[l] = -inv.d[l];
  }
  return out;
}

double invariant_distance(const InvariantState& a, const InvariantState& b) {
  require_same_lattice(a.lattice, b.lattice, "invariant_distance");
  const Lattice& lat = a.lattice;
  double worst = 0.0;
  for (int s = 0; s < lat.site_count(); ++s) {
    if (lat.active(s)) worst = std::max(worst, std::abs(a.rho[s] - b.rho[s]));
  }
  for (int l = 0; l < lat.link_count(); ++l) {
    if (lat.link_active(l)) worst = std::max(worst, circular_distance(a.d[l], b.d[l]));
  }
  return worst;
}

double gauge_residual(const FieldConfig& c1, const FieldConfig& c2,
                      const GaugeTransform& g) {
  require_same_lattice(c1.lattice, c2.lattice, "gauge_residual");
  const Lattice& lat = c1.lattice;
  const FieldConfig moved = apply_gauge(c1, g);
  double worst = 0.0;
  for (int s = 0; s < lat.site_count(); ++s) {
    if (lat.active(s)) worst = std::max(worst, std::abs(moved.psi[s] - c2.psi[s]));
  }
  for (int l = 0; l < lat.link_count(); ++l) {
    if (lat.link_active(l)) {
      worst = std::max(worst, circular_distance(moved.links[l], c2.links[l]));
    }
  }
  return worst;
}

namespace {

bool moduli_match(const FieldConfig& c1, const FieldConfig& c2, double tol) {
  const Lattice& lat = c1.lattice;
  for (int s = 0; s < lat.site_count(); ++s) {
    if (lat.active(s) && std::abs(std::abs(c1.psi[s]) - std::abs(c2.psi[s])) > tol) {
      return false;
    }
  }
  return true;
}

bool links_consistent(const FieldConfig& c1, const FieldConfig& c2,
                      const GaugeTransform& g, double tol) {
  const Lattice& lat = c1.lattice;
  for (int l = 0; l < lat.link_count(); ++l) {
    const auto e = lat.link_ends(l);
    if (!lat.active(e.tail) || !lat.active(e.head)) continue;
    const double r = c2.links[l] - c1.links[l] - (g.lambda[e.head] - g.lambda[e.tail]);
    if (std::abs(wrap_phase(r)) > tol) return false;
  }
  return true;
}

}  // namespace

std::optional<GaugeTransform> gauge_equivalent(const FieldConfig& c1,
                                               const FieldConfig& c2, double eps,
                                               double tol) {
  require_same_lattice(c1.lattice, c2.lattice, "gauge_equivalent");
  require_nonvanishing(c1, eps);
  require_nonvanishing(c2, eps);
  if (!moduli_match(c1, c2, tol)) return std::nullopt;
  const Lattice& lat = c1.lattice;
  GaugeTransform g = GaugeTransform::identity(lat);
  for (int s = 0; s < lat.site_count(); ++s) {
    if (lat.active(s)) g.lambda[s] = std::arg(c2.psi[s] / c1.psi[s]);
  }
  if (!links_consistent(c1, c2, g, tol)) return std::nullopt;
  return g;
}

std::optional<GaugeTransform> gauge_equivalent_general(const FieldConfig& c1,
                                                       const FieldConfig& c2,
                                                       double eps, double tol) {
  require_same_lattice(c1.lattice, c2.lattice, "gauge_equivalent_general");
  if (!moduli_match(c1, c2, tol)) return std::nullopt;
  const Lattice& lat = c1.lattice;
  const double thr1 = zero_threshold(c1, eps);
  const double thr2 = zero_threshold(c2, eps);

  GaugeTransform g = GaugeTransform::identity(lat);
  std::vector<std::uint8_t> fixed(lat.site_count(), 0);
  std::deque<int> queue;
  for (int s = 0; s < lat.site_count(); ++s) {
    if (!lat.active(s)) continue;
    const bool z1 = std::abs(c1.psi[s]) <= thr1;
    const bool z2 = std::abs(c2.psi[s]) <= thr2;
    if (z1 != z2) return std::nullopt;
    if (!z1) {
      g.lambda[s] = std::arg(c2.psi[s] / c1.psi[s]);
      fixed[s] = 1;
      queue.push_back(s);
    }
  }
  // Propagate the gauge function into zero sites along links: every link
  // demands lambda(head) - lambda(tail) = a2 - a1 (mod 2pi).
  auto flood = [&]() {
    while (!queue.empty()) {
      const int s = queue.front();
      queue.pop_front();
      for (Direction d : kAllDirections) {
        auto st = lat.step(s, d);
        if (!st || !lat.active(st->head) || fixed[st->head]) continue;
        const double da = st->sign * (c2.links[st->link] - c1.links[st->link]);
        g.lambda[st->head] = wrap_phase(g.lambda[s] + da);
        fixed[st->head] = 1;
        queue.push_back(st->head);
      }
    }
  };
  flood();
  for (int s = 0; s < lat.site_count(); ++s) {
    if (lat.active(s) && !fixed[s]) {
      fixed[s] = 1;  // component without any nonzero site: free base value 0
      queue.push_back(s);
      flood();
    }
  }
  if (!links_consistent(c1, c2, g, tol)) return std::nullopt;
  return g;
}

FieldConfig random_config(const Lattice& lattice, std::uint64_t seed, double rho_min) {
  if (!(rho_min > 0.0)) throw_invalid("random_config: rho_min must be positive");
  Rng rng(seed);
  FieldConfig c(lattice);
  for (int s = 0; s < lattice.site_count(); ++s) {
    const double r = rho_min + rng.uniform();
    const double phase = std::numbers::pi - kTwoPi * rng.uniform();
    if (lattice.active(s)) c.psi[s] = std::polar(r, phase);
  }
  for (auto& a : c.links) a = std::numbers::pi - kTwoPi * rng.uniform();
  return c;
}

GaugeTransform random_gauge(const Lattice& lattice, std::uint64_t seed, double amplitude) {
  Rng rng(seed);
  GaugeTransform g = GaugeTransform::identity(lattice);
  for (auto& v : g.lambda) v = amplitude * (2.0 * rng.uniform() - 1.0);
  return g;
}

FieldConfig restrict_to(const FieldConfig& c, const Region& region) {
  if (!c.lattice.same_geometry(region.lattice())) {
    throw_invalid("restrict_to: region belongs to a different lattice");
  }
  std::vector<std::uint8_t> mask(c.lattice.site_count(), 0);
  for (int s = 0; s < c.lattice.site_count(); ++s) {
    mask[s] = (c.lattice.active(s) && region.contains(s)) ? 1 : 0;
  }
  FieldConfig out = c;
  out.lattice = c.lattice.with_active_mask(std::move(mask));
  for (int s = 0; s < c.lattice.site_count(); ++s) {
    if (!out.lattice.active(s)) out.psi[s] = Complex{0.0, 0.0};
  }
  return out;
}

}  // namespace abfield
