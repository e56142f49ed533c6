#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "abfield/fields.hpp"
#include "abfield/holonomy.hpp"
#include "abfield/lattice.hpp"
#include "abfield/rng.hpp"

namespace abfield::fixtures {

// Annulus around a 4x4 solenoid on a 12x12 lattice, covered by a left region X
// (columns 0..5) and a right region Y (columns 4..11). The overlap splits into
// a bottom and a top strip; alpha sits in the bottom strip, beta in the top.
struct AnnulusCover {
  FieldConfig config;
  Region x;
  Region y;
  Region bottom_strip;
  int alpha;
  int beta;
};

inline AnnulusCover annulus_cover(double flux, std::uint64_t seed) {
  const Lattice base = Lattice::build(12, 12, 1.0, Boundary::Open);
  const FluxSpec spec{5.5, 5.5, 2.2, flux};
  FieldConfig c = solenoid_config(base, spec, Complex{1.0, 0.0});
  const FieldConfig noise = random_config(c.lattice, seed, 0.2);
  for (int s = 0; s < c.lattice.site_count(); ++s) c.psi[s] = noise.psi[s];
  c = apply_gauge(c, random_gauge(c.lattice, seed + 1, std::numbers::pi));
  const Lattice& lat = c.lattice;
  Region x = Region::rectangle(lat, 0, 0, 5, 11);
  Region y = Region::rectangle(lat, 4, 0, 11, 11);
  Region bottom = Region::rectangle(lat, 4, 0, 5, 3);
  return {c, x, y, bottom, lat.site(4, 1), lat.site(5, 10)};
}

// Winding number of a closed loop around the point (cx, cy) from the summed
// turning angle of the polygon through its site positions.
inline int winding_oracle(const Lattice& lat, const Loop& loop, double cx, double cy) {
  double total = 0.0;
  for (const auto& l : loop.links) {
    const int t = l.tail;
    const int h = head_of(lat, l);
    const double a0 = std::atan2(lat.site_y(t) - cy, lat.site_x(t) - cx);
    const double a1 = std::atan2(lat.site_y(h) - cy, lat.site_x(h) - cx);
    total += std::remainder(a1 - a0, 2.0 * std::numbers::pi);
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

// Closed random walk on an open lattice without excised sites: a random
// excursion followed by a Manhattan return to the start.
inline Loop random_closed_walk(const Lattice& lat, Rng& rng, int steps) {
  std::vector<int> sites;
  int s = rng.below(lat.site_count());
  const int start = s;
  sites.push_back(s);
  for (int i = 0; i < steps; ++i) {
    auto st = lat.step(s, kAllDirections[rng.below(4)]);
    if (!st) continue;
    s = st->head;
    sites.push_back(s);
  }
  while (s != start) {
    const int dx = lat.site_x(start) - lat.site_x(s);
    const int dy = lat.site_y(start) - lat.site_y(s);
    const Direction d = dx != 0 ? (dx > 0 ? Direction::PlusX : Direction::MinusX)
                                : (dy > 0 ? Direction::PlusY : Direction::MinusY);
    s = lat.step(s, d)->head;
    sites.push_back(s);
  }
  if (sites.size() < 3) {
    const Direction d = lat.step(start, Direction::PlusX) ? Direction::PlusX : Direction::MinusX;
    const int n = lat.step(start, d)->head;
    sites = {start, n, start};
  }
  return Loop{path_through_sites(lat, sites)};
}

}  // namespace abfield::fixtures
