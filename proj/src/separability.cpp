#include "abfield/separability.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "abfield/error.hpp"
#include "abfield/phase.hpp"

namespace abfield {

CoverAnalysis analyze_cover(const FieldConfig& c, const Region& x, const Region& y,
                            double eps) {
  const Lattice& lat = c.lattice;
  if (!lat.same_geometry(x.lattice()) || !lat.same_geometry(y.lattice())) {
    throw_invalid("analyze_cover: regions belong to a different lattice");
  }
  const Region full = Region::full(lat);
  const Region rx = x.intersected(full);
  const Region ry = y.intersected(full);
  const Region uni = rx.united(ry);
  if (!(uni == full)) throw_invalid("analyze_cover: X u Y does not cover the lattice");
  for (int l = 0; l < lat.link_count(); ++l) {
    if (lat.link_active(l) && !rx.contains_link(l) && !ry.contains_link(l)) {
      throw_invalid("analyze_cover: link " + std::to_string(l) +
                    " joins X \\ Y to Y \\ X and lies in neither region");
    }
  }
  const Region overlap = rx.intersected(ry);
  if (overlap.empty()) throw_invalid("analyze_cover: X and Y do not overlap");

  CoverAnalysis out{rx, ry, connected_components(overlap), {}, {}, zero_threshold(c, eps),
                    false, {}};
  for (const auto& comp : out.overlap_components) {
    bool zero = true;
    for (int s : comp.sites()) {
      if (std::abs(c.psi[s]) > out.threshold) {
        zero = false;
        break;
      }
    }
    out.component_is_zero.push_back(zero);
    if (zero) out.zero_components.push_back(comp);
  }
  out.nonseparable = out.overlap_components.size() >= 2 && !out.zero_components.empty();

  std::ostringstream os;
  os << "overlap has " << out.overlap_components.size() << " component(s) (sizes";
  for (const auto& comp : out.overlap_components) os << ' ' << comp.size();
  os << "); " << out.zero_components.size() << " with |psi| <= " << out.threshold
     << " (eps = " << eps << " relative to max |psi|)";
  if (out.overlap_components.size() < 2) os << "; overlap connected, state separable";
  else if (out.zero_components.empty()) os << "; psi nonzero on every component, state separable";
  else os << "; state non-separable";
  out.diagnostics = os.str();
  return out;
}

FieldConfig construct_witness(const FieldConfig& c, const CoverAnalysis& analysis,
                              double delta) {
  if (!analysis.nonseparable) {
    throw Error(ErrorCode::NoWitness,
                "cover is separable; no inequivalent configuration with equivalent "
                "restrictions exists");
  }
  if (circular_distance(delta, 0.0) < 1e-12) {
    throw_invalid("construct_witness: delta is a multiple of 2pi");
  }
  const Region& zero = analysis.zero_components.front();
  GaugeTransform gy = GaugeTransform::identity(c.lattice);
  for (int s : zero.sites()) gy.lambda[s] = -delta;
  const FieldConfig cx = restrict_to(c, analysis.x);
  const FieldConfig cy = apply_gauge(restrict_to(c, analysis.y), gy);
  const double tol = std::max(1e-9, 4.0 * analysis.threshold);
  return glue(cx, cy, tol);
}

FieldConfig glue(const FieldConfig& cx, const FieldConfig& cy, double tol) {
  const Lattice& lx = cx.lattice;
  const Lattice& ly = cy.lattice;
  if (!lx.same_geometry(ly)) throw_invalid("glue: configurations on different lattices");
  const int n = lx.site_count();
  std::vector<std::uint8_t> mask(n, 0);
  std::vector<int> bad_sites;
  for (int s = 0; s < n; ++s) {
    mask[s] = (lx.active(s) || ly.active(s)) ? 1 : 0;
    if (lx.active(s) && ly.active(s) && std::abs(cx.psi[s] - cy.psi[s]) > tol) {
      bad_sites.push_back(s);
    }
  }
  std::vector<int> bad_links;
  for (int l = 0; l < lx.link_count(); ++l) {
    if (lx.link_active(l) && ly.link_active(l) &&
        circular_distance(cx.links[l], cy.links[l]) > tol) {
      bad_links.push_back(l);
    }
  }
  if (!bad_sites.empty() || !bad_links.empty()) {
    throw GluingMismatchError(std::move(bad_sites), std::move(bad_links));
  }
  FieldConfig out(lx.with_active_mask(std::move(mask)));
  for (int s = 0; s < n; ++s) {
    if (lx.active(s)) out.psi[s] = cx.psi[s];
    else if (ly.active(s)) out.psi[s] = cy.psi[s];
  }
  for (int l = 0; l < lx.link_count(); ++l) {
    out.links[l] = (!lx.link_active(l) && ly.link_active(l)) ? cy.links[l] : cx.links[l];
  }
  return out;
}

WitnessCheck verify_witness(const FieldConfig& c, const FieldConfig& witness,
                            const CoverAnalysis& analysis, double eps, double tol) {
  WitnessCheck out;
  const FieldConfig cx = restrict_to(c, analysis.x);
  const FieldConfig cy = restrict_to(c, analysis.y);
  const FieldConfig wx = restrict_to(witness, analysis.x);
  const FieldConfig wy = restrict_to(witness, analysis.y);
  if (auto g = gauge_equivalent_general(cx, wx, eps, tol)) {
    out.x_equivalent = true;
    out.x_residual = gauge_residual(cx, wx, *g);
  }
  if (auto g = gauge_equivalent_general(cy, wy, eps, tol)) {
    out.y_equivalent = true;
    out.y_residual = gauge_residual(cy, wy, *g);
  }
  out.whole_equivalent = gauge_equivalent_general(c, witness, eps, tol).has_value();
  return out;
}

std::optional<GaugeTransform> merge_region_gauges(const FieldConfig& c,
                                                  const FieldConfig& c_prime,
                                                  const CoverAnalysis& analysis,
                                                  double eps, double tol) {
  const auto gx = gauge_equivalent_general(restrict_to(c, analysis.x),
                                           restrict_to(c_prime, analysis.x), eps, tol);
  const auto gy = gauge_equivalent_general(restrict_to(c, analysis.y),
                                           restrict_to(c_prime, analysis.y), eps, tol);
  if (!gx || !gy) return std::nullopt;

  // Lambda_X - Lambda_Y must be one constant (mod 2pi) on the whole overlap.
  std::optional<double> offset;
  for (const auto& comp : analysis.overlap_components) {
    for (int s : comp.sites()) {
      const double diff = wrap_phase(gx->lambda[s] - gy->lambda[s]);
      if (!offset) offset = diff;
      else if (circular_distance(diff, *offset) > tol) return std::nullopt;
    }
  }
  GaugeTransform merged = GaugeTransform::identity(c.lattice);
  for (int s = 0; s < c.lattice.site_count(); ++s) {
    if (analysis.x.contains(s)) merged.lambda[s] = gx->lambda[s];
    else if (analysis.y.contains(s)) merged.lambda[s] = gy->lambda[s] + offset.value_or(0.0);
  }
  if (gauge_residual(c, c_prime, merged) > tol) return std::nullopt;
  return merged;
}

double phase_transport(const FieldConfig& c, std::span<const DirectedLink> path,
                       double eps) {
  validate_path(c.lattice, path);
  const double thr = zero_threshold(c, eps);
  std::vector<int> zeros;
  auto check = [&](int s) {
    if (!c.lattice.active(s) || std::abs(c.psi[s]) <= thr) zeros.push_back(s);
  };
  double sum = 0.0;
  for (const auto& l : path) {
    const auto st = c.lattice.resolve(l);
    check(l.tail);
    check(st.head);
    sum += wrap_phase(std::arg(c.psi[st.head]) - std::arg(c.psi[l.tail]) -
                      st.sign * c.links[st.link]);
  }
  if (!zeros.empty()) {
    std::sort(zeros.begin(), zeros.end());
    zeros.erase(std::unique(zeros.begin(), zeros.end()), zeros.end());
    throw ZeroFieldError(std::move(zeros), thr);
  }
  return sum;
}

std::vector<DirectedLink> shortest_path(const Region& region, int from, int to) {
  const Lattice& lat = region.lattice();
  if (!region.contains(from) || !region.contains(to)) {
    throw_invalid("shortest_path: endpoints must lie inside the region");
  }
  std::vector<int> parent(lat.site_count(), -1);
  std::vector<Direction> via(lat.site_count(), Direction::PlusX);
  std::deque<int> queue{from};
  parent[from] = from;
  while (!queue.empty() && parent[to] < 0) {
    const int s = queue.front();
    queue.pop_front();
    std::vector<std::pair<int, Direction>> next;
    for (Direction d : kAllDirections) {
      auto st = lat.step(s, d);
      if (st && region.contains(st->head) && parent[st->head] < 0) next.emplace_back(st->head, d);
    }
    std::sort(next.begin(), next.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto [h, d] : next) {
      if (parent[h] >= 0) continue;
      parent[h] = s;
      via[h] = d;
      queue.push_back(h);
    }
  }
  if (parent[to] < 0) {
    throw_invalid("no path from site " + std::to_string(from) + " to site " +
                  std::to_string(to) + " inside the region");
  }
  std::vector<DirectedLink> path;
  for (int s = to; s != from; s = parent[s]) path.push_back({parent[s], via[s]});
  std::reverse(path.begin(), path.end());
  return path;
}

CodependenceResult codependence_check(const FieldConfig& c, const Region& x,
                                      const Region& y, int alpha, int beta, double eps) {
  const Region full = Region::full(c.lattice);
  const Region rx = x.intersected(full);
  const Region ry = y.intersected(full);
  const Region overlap = rx.intersected(ry);
  if (!overlap.contains(alpha) || !overlap.contains(beta)) {
    throw_invalid("codependence_check: alpha and beta must lie in X n Y");
  }
  if (!is_simply_connected(rx) || !is_simply_connected(ry)) {
    throw_invalid("codependence_check: X and Y must each be simply connected");
  }
  require_nonvanishing(c, eps);
  const auto path_x = shortest_path(rx, alpha, beta);
  const auto path_y = shortest_path(ry, alpha, beta);

  CodependenceResult out;
  out.theta_x = phase_transport(c, path_x, eps);
  out.theta_y = phase_transport(c, path_y, eps);
  out.loop.links = path_y;
  for (auto it = path_x.rbegin(); it != path_x.rend(); ++it) {
    out.loop.links.push_back({head_of(c.lattice, *it), opposite(it->dir)});
  }
  if (out.loop.links.empty()) throw_invalid("codependence_check: alpha equals beta");
  out.holonomy = holonomy(c, out.loop).raw;
  out.residual = std::abs(wrap_phase(out.theta_x - out.theta_y - out.holonomy));
  return out;
}

}  // namespace abfield
