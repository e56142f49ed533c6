#pragma once

#include <optional>
#include <string>
#include <vector>

#include "abfield/fields.hpp"
#include "abfield/holonomy.hpp"
#include "abfield/lattice.hpp"

namespace abfield {

// Two-region cover X, Y of a configuration. The state on X u Y is
// non-separable exactly when the overlap has at least two components and psi
// vanishes (below the eps threshold) on at least one of them.
struct CoverAnalysis {
  Region x;
  Region y;
  std::vector<Region> overlap_components;
  std::vector<bool> component_is_zero;  // parallel to overlap_components
  std::vector<Region> zero_components;
  double threshold = 0.0;  // absolute psi threshold used for "zero"
  bool nonseparable = false;
  std::string diagnostics;
};

// Requires X u Y to cover every active site, a nonempty overlap, and every
// active link to lie inside X or inside Y.
CoverAnalysis analyze_cover(const FieldConfig& c, const Region& x, const Region& y,
                            double eps = kDefaultEps);

// Changes the configuration only through a gauge function on Y that is 0
// except on the first zero overlap component, where it is -delta. A loop that
// runs from X through that component into Y \ X picks up +delta.
FieldConfig construct_witness(const FieldConfig& c, const CoverAnalysis& analysis,
                              double delta);

// The configuration on (active cX) u (active cY) that restricts to cX and cY.
// Links induced by X come from cX, remaining links induced by Y from cY, and
// any other link keeps its cX value.
FieldConfig glue(const FieldConfig& cx, const FieldConfig& cy, double tol = 1e-9);

struct WitnessCheck {
  bool x_equivalent = false;      // c'|X ~ c|X
  bool y_equivalent = false;      // c'|Y ~ c|Y
  bool whole_equivalent = false;  // c' ~ c (must be false for a witness)
  double x_residual = 0.0;
  double y_residual = 0.0;
  bool passed() const { return x_equivalent && y_equivalent && !whole_equivalent; }
};

WitnessCheck verify_witness(const FieldConfig& c, const FieldConfig& witness,
                            const CoverAnalysis& analysis, double eps = kDefaultEps,
                            double tol = 1e-8);

// Recovers gauge functions on X and Y relating c to c_prime, aligns them on the
// overlap and merges them into one transform on X u Y. Empty when the two
// region-wise transforms cannot be reconciled.
std::optional<GaugeTransform> merge_region_gauges(const FieldConfig& c,
                                                  const FieldConfig& c_prime,
                                                  const CoverAnalysis& analysis,
                                                  double eps = kDefaultEps,
                                                  double tol = 1e-8);

// Sum of covariant phase differences d along the path.
double phase_transport(const FieldConfig& c, std::span<const DirectedLink> path,
                       double eps = kDefaultEps);

// Breadth-first shortest path inside the region; ties broken by visiting
// neighbours in increasing site index. Throws invalid-argument if unreachable.
std::vector<DirectedLink> shortest_path(const Region& region, int from, int to);

struct CodependenceResult {
  double theta_x = 0.0;
  double theta_y = 0.0;
  double holonomy = 0.0;  // raw holonomy of the loop alpha -Y-> beta -X-> alpha
  double residual = 0.0;  // |wrap(theta_x - theta_y - holonomy)|
  Loop loop;
};

CodependenceResult codependence_check(const FieldConfig& c, const Region& x,
                                      const Region& y, int alpha, int beta,
                                      double eps = kDefaultEps);

}  // namespace abfield
