#include "abfield/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "abfield/error.hpp"

namespace abfield {

Direction opposite(Direction d) noexcept {
  switch (d) {
    case Direction::PlusX: return Direction::MinusX;
    case Direction::MinusX: return Direction::PlusX;
    case Direction::PlusY: return Direction::MinusY;
    case Direction::MinusY: return Direction::PlusY;
  }
  return d;
}

Lattice Lattice::build(int nx, int ny, double spacing, Boundary boundary) {
  if (nx < 2 || ny < 2) {
    throw_invalid("lattice dimensions must be at least 2, got " +
                  std::to_string(nx) + "x" + std::to_string(ny));
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw_invalid("lattice spacing must be positive and finite");
  }
  Lattice l;
  l.nx_ = nx;
  l.ny_ = ny;
  l.spacing_ = spacing;
  l.boundary_ = boundary;
  l.hx_ = boundary == Boundary::Periodic ? nx : nx - 1;
  l.vy_ = boundary == Boundary::Periodic ? ny : ny - 1;
  l.active_.assign(static_cast<std::size_t>(nx) * ny, 1);
  return l;
}

int Lattice::site(int x, int y) const {
  if (x < 0 || x >= nx_ || y < 0 || y >= ny_) {
    throw_invalid("site (" + std::to_string(x) + ", " + std::to_string(y) +
                  ") outside the lattice");
  }
  return y * nx_ + x;
}

bool Lattice::on_boundary(int s) const noexcept {
  const int x = site_x(s);
  const int y = site_y(s);
  return x == 0 || y == 0 || x == nx_ - 1 || y == ny_ - 1;
}

int Lattice::horizontal_link(int x, int y) const {
  if (x < 0 || x >= hx_ || y < 0 || y >= ny_) {
    throw_invalid("horizontal link outside the lattice");
  }
  return y * hx_ + x;
}

int Lattice::vertical_link(int x, int y) const {
  if (x < 0 || x >= nx_ || y < 0 || y >= vy_) {
    throw_invalid("vertical link outside the lattice");
  }
  return horizontal_link_count() + y * nx_ + x;
}

LinkEnds Lattice::link_ends(int link) const {
  if (link < 0 || link >= link_count()) throw_invalid("link index out of range");
  if (is_horizontal(link)) {
    const int x = link % hx_;
    const int y = link / hx_;
    return {y * nx_ + x, y * nx_ + (x + 1) % nx_};
  }
  const int v = link - horizontal_link_count();
  const int x = v % nx_;
  const int y = v / nx_;
  return {y * nx_ + x, ((y + 1) % ny_) * nx_ + x};
}

std::optional<LinkStep> Lattice::step(int s, Direction d) const {
  if (s < 0 || s >= site_count()) return std::nullopt;
  const int x = site_x(s);
  const int y = site_y(s);
  const bool per = periodic();
  switch (d) {
    case Direction::PlusX:
      if (x + 1 >= nx_ && !per) return std::nullopt;
      return LinkStep{y * hx_ + x, +1, y * nx_ + (x + 1) % nx_};
    case Direction::MinusX: {
      if (x == 0 && !per) return std::nullopt;
      const int xt = (x + nx_ - 1) % nx_;
      return LinkStep{y * hx_ + xt, -1, y * nx_ + xt};
    }
    case Direction::PlusY:
      if (y + 1 >= ny_ && !per) return std::nullopt;
      return LinkStep{horizontal_link_count() + y * nx_ + x, +1,
                      ((y + 1) % ny_) * nx_ + x};
    case Direction::MinusY: {
      if (y == 0 && !per) return std::nullopt;
      const int yt = (y + ny_ - 1) % ny_;
      return LinkStep{horizontal_link_count() + yt * nx_ + x, -1, yt * nx_ + x};
    }
  }
  return std::nullopt;
}

LinkStep Lattice::resolve(const DirectedLink& l) const {
  auto st = step(l);
  if (!st) {
    throw_invalid("directed link from site " + std::to_string(l.tail) +
                  " leaves the lattice");
  }
  return *st;
}

int Lattice::plaquette(int px, int py) const {
  if (px < 0 || px >= hx_ || py < 0 || py >= vy_) {
    throw_invalid("plaquette outside the lattice");
  }
  return py * hx_ + px;
}

std::array<int, 4> Lattice::plaquette_corners(int p) const {
  const int px = plaquette_x(p);
  const int py = plaquette_y(p);
  const int x1 = (px + 1) % nx_;
  const int y1 = (py + 1) % ny_;
  return {py * nx_ + px, py * nx_ + x1, y1 * nx_ + x1, y1 * nx_ + px};
}

std::array<DirectedLink, 4> Lattice::plaquette_boundary(int p) const {
  const auto c = plaquette_corners(p);
  return {DirectedLink{c[0], Direction::PlusX}, DirectedLink{c[1], Direction::PlusY},
          DirectedLink{c[2], Direction::MinusX}, DirectedLink{c[3], Direction::MinusY}};
}

int Lattice::active_site_count() const noexcept {
  return static_cast<int>(std::count(active_.begin(), active_.end(), 1));
}

bool Lattice::link_active(int link) const {
  const auto e = link_ends(link);
  return active(e.tail) && active(e.head);
}

Lattice Lattice::with_excised(std::span<const int> sites) const {
  Lattice out = *this;
  for (int s : sites) {
    if (s < 0 || s >= site_count()) throw_invalid("excised site out of range");
    out.active_[s] = 0;
  }
  return out;
}

Lattice Lattice::with_active_mask(std::vector<std::uint8_t> mask) const {
  if (mask.size() != active_.size()) throw_invalid("active mask size mismatch");
  Lattice out = *this;
  for (auto& m : mask) m = m ? 1 : 0;
  out.active_ = std::move(mask);
  return out;
}

bool Lattice::same_geometry(const Lattice& o) const noexcept {
  return nx_ == o.nx_ && ny_ == o.ny_ && spacing_ == o.spacing_ &&
         boundary_ == o.boundary_;
}

// ---------------------------------------------------------------------------

Region::Region(const Lattice& lattice)
    : lattice_(lattice), mask_(lattice.site_count(), 0) {}

Region::Region(const Lattice& lattice, std::vector<std::uint8_t> mask)
    : lattice_(lattice), mask_(std::move(mask)) {
  if (static_cast<int>(mask_.size()) != lattice_.site_count()) {
    throw_invalid("region mask size does not match the lattice");
  }
  for (int s = 0; s < lattice_.site_count(); ++s) {
    mask_[s] = (mask_[s] && lattice_.active(s)) ? 1 : 0;
  }
}

Region Region::full(const Lattice& lattice) {
  return Region(lattice, lattice.active_mask());
}

Region Region::rectangle(const Lattice& lattice, int x0, int y0, int x1, int y1) {
  std::vector<std::uint8_t> mask(lattice.site_count(), 0);
  const int xa = std::max(0, std::min(x0, x1));
  const int xb = std::min(lattice.nx() - 1, std::max(x0, x1));
  const int ya = std::max(0, std::min(y0, y1));
  const int yb = std::min(lattice.ny() - 1, std::max(y0, y1));
  for (int y = ya; y <= yb; ++y) {
    for (int x = xa; x <= xb; ++x) mask[y * lattice.nx() + x] = 1;
  }
  return Region(lattice, std::move(mask));
}

Region Region::from_sites(const Lattice& lattice, std::span<const int> sites) {
  std::vector<std::uint8_t> mask(lattice.site_count(), 0);
  for (int s : sites) {
    if (s < 0 || s >= lattice.site_count()) throw_invalid("region site out of range");
    mask[s] = 1;
  }
  return Region(lattice, std::move(mask));
}

int Region::size() const noexcept {
  return static_cast<int>(std::count(mask_.begin(), mask_.end(), 1));
}

std::vector<int> Region::sites() const {
  std::vector<int> out;
  for (int s = 0; s < static_cast<int>(mask_.size()); ++s) {
    if (mask_[s]) out.push_back(s);
  }
  return out;
}

bool Region::contains_link(int link) const {
  const auto e = lattice_.link_ends(link);
  return contains(e.tail) && contains(e.head);
}

std::vector<int> Region::induced_links() const {
  std::vector<int> out;
  for (int l = 0; l < lattice_.link_count(); ++l) {
    if (contains_link(l)) out.push_back(l);
  }
  return out;
}

std::vector<int> Region::induced_plaquettes() const {
  std::vector<int> out;
  for (int p = 0; p < lattice_.plaquette_count(); ++p) {
    const auto c = lattice_.plaquette_corners(p);
    if (std::all_of(c.begin(), c.end(), [&](int s) { return contains(s); })) {
      out.push_back(p);
    }
  }
  return out;
}

void Region::check_compatible(const Region& other) const {
  if (!lattice_.same_geometry(other.lattice_)) {
    throw_invalid("regions belong to different lattices");
  }
}

Region Region::united(const Region& other) const {
  check_compatible(other);
  auto m = mask_;
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = m[i] | other.mask_[i];
  return Region(lattice_, std::move(m));
}

Region Region::intersected(const Region& other) const {
  check_compatible(other);
  auto m = mask_;
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = m[i] & other.mask_[i];
  return Region(lattice_, std::move(m));
}

Region Region::minus(const Region& other) const {
  check_compatible(other);
  auto m = mask_;
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = m[i] & !other.mask_[i];
  return Region(lattice_, std::move(m));
}

std::vector<Region> connected_components(const Region& region) {
  if (region.empty()) throw_invalid("connected_components: empty region");
  const Lattice& lat = region.lattice();
  std::vector<int> label(lat.site_count(), -1);
  std::vector<Region> out;
  for (int seed : region.sites()) {
    if (label[seed] >= 0) continue;
    const int id = static_cast<int>(out.size());
    std::vector<std::uint8_t> mask(lat.site_count(), 0);
    std::deque<int> queue{seed};
    label[seed] = id;
    while (!queue.empty()) {
      const int s = queue.front();
      queue.pop_front();
      mask[s] = 1;
      for (Direction d : kAllDirections) {
        auto st = lat.step(s, d);
        if (st && region.contains(st->head) && label[st->head] < 0) {
          label[st->head] = id;
          queue.push_back(st->head);
        }
      }
    }
    out.emplace_back(lat, std::move(mask));
  }
  return out;
}

bool is_simply_connected(const Region& region) {
  if (region.empty()) throw_invalid("is_simply_connected: empty region");
  if (region.lattice().periodic()) {
    throw Error(ErrorCode::NotSupported,
                "simple connectedness is not defined for periodic lattices");
  }
  if (connected_components(region).size() != 1) return false;
  const long links = static_cast<long>(region.induced_links().size());
  const long sites = region.size();
  const long plaquettes = static_cast<long>(region.induced_plaquettes().size());
  return links - sites + 1 == plaquettes;
}

int head_of(const Lattice& lattice, const DirectedLink& l) {
  return lattice.resolve(l).head;
}

void validate_path(const Lattice& lattice, std::span<const DirectedLink> path) {
  for (std::size_t i = 0; i < path.size(); ++i) {
    const int h = head_of(lattice, path[i]);
    if (i + 1 < path.size() && path[i + 1].tail != h) {
      throw_invalid("path is not continuous at link " + std::to_string(i));
    }
  }
}

void validate_loop(const Lattice& lattice, const Loop& loop) {
  if (loop.links.empty()) throw_invalid("loop has no links");
  validate_path(lattice, loop.links);
  if (head_of(lattice, loop.links.back()) != loop.links.front().tail) {
    throw_invalid("loop is not closed");
  }
}

std::vector<DirectedLink> path_through_sites(const Lattice& lattice,
                                             std::span<const int> sites) {
  std::vector<DirectedLink> path;
  for (std::size_t i = 0; i + 1 < sites.size(); ++i) {
    bool found = false;
    for (Direction d : kAllDirections) {
      auto st = lattice.step(sites[i], d);
      if (st && st->head == sites[i + 1]) {
        path.push_back({sites[i], d});
        found = true;
        break;
      }
    }
    if (!found) {
      throw_invalid("sites " + std::to_string(sites[i]) + " and " +
                    std::to_string(sites[i + 1]) + " are not adjacent");
    }
  }
  return path;
}

Loop rectangle_loop(const Lattice& lattice, int x0, int y0, int x1, int y1) {
  if (x1 <= x0 || y1 <= y0) throw_invalid("rectangle loop needs x0 < x1 and y0 < y1");
  Loop loop;
  for (int x = x0; x < x1; ++x) loop.links.push_back({lattice.site(x, y0), Direction::PlusX});
  for (int y = y0; y < y1; ++y) loop.links.push_back({lattice.site(x1, y), Direction::PlusY});
  for (int x = x1; x > x0; --x) loop.links.push_back({lattice.site(x, y1), Direction::MinusX});
  for (int y = y1; y > y0; --y) loop.links.push_back({lattice.site(x0, y), Direction::MinusY});
  return loop;
}

Loop reversed(const Lattice& lattice, const Loop& loop) {
  Loop out;
  out.links.reserve(loop.links.size());
  for (auto it = loop.links.rbegin(); it != loop.links.rend(); ++it) {
    out.links.push_back({head_of(lattice, *it), opposite(it->dir)});
  }
  return out;
}

Loop concatenated(const Lattice& lattice, const Loop& first, const Loop& second) {
  validate_loop(lattice, first);
  validate_loop(lattice, second);
  if (first.links.front().tail != second.links.front().tail) {
    throw_invalid("loops must share a basepoint to be concatenated");
  }
  Loop out = first;
  out.links.insert(out.links.end(), second.links.begin(), second.links.end());
  return out;
}

std::map<int, int> enclosed_plaquettes(const Lattice& lattice, const Loop& loop) {
  validate_loop(lattice, loop);
  // Net x-traversal of every horizontal link; the winding number of a plaquette
  // is minus the net traversal of the horizontal links above it in its column.
  std::map<std::pair<int, int>, int> crossings;  // (column, row) -> net
  for (const auto& l : loop.links) {
    if (l.dir != Direction::PlusX && l.dir != Direction::MinusX) continue;
    const auto st = lattice.resolve(l);
    const int x = lattice.site_x(l.tail);
    if (lattice.periodic() && ((l.dir == Direction::PlusX && x == lattice.nx() - 1) ||
                               (l.dir == Direction::MinusX && x == 0))) {
      throw Error(ErrorCode::NotSupported,
                  "winding numbers are undefined for loops using wrap links");
    }
    const int column = l.dir == Direction::PlusX ? x : x - 1;
    crossings[{column, lattice.site_y(l.tail)}] += st.sign;
  }
  std::map<int, int> out;
  auto it = crossings.begin();
  while (it != crossings.end()) {
    const int column = it->first.first;
    std::vector<std::pair<int, int>> rows;  // ascending by row
    for (; it != crossings.end() && it->first.first == column; ++it) {
      if (it->second != 0) rows.emplace_back(it->first.second, it->second);
    }
    if (rows.empty()) continue;
    // Sweep downward from the highest row.
    int above = 0;
    for (std::size_t k = rows.size(); k-- > 0;) {
      above += rows[k].second;
      const int lower = k > 0 ? rows[k - 1].first : rows[k].first;
      if (k == 0) break;
      for (int py = lower; py < rows[k].first; ++py) {
        if (above != 0) out[lattice.plaquette(column, py)] = -above;
      }
    }
  }
  return out;
}

}  // namespace abfield
