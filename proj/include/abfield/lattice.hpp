#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace abfield {

enum class Boundary : std::uint8_t { Open = 0, Periodic = 1 };

enum class Direction : std::uint8_t { PlusX, MinusX, PlusY, MinusY };

inline constexpr std::array<Direction, 4> kAllDirections = {
    Direction::PlusX, Direction::MinusX, Direction::PlusY, Direction::MinusY};

Direction opposite(Direction d) noexcept;

// A link traversed from `tail` in direction `dir`. Carries no lattice
// reference; a Lattice resolves it to a stored link and an orientation sign.
struct DirectedLink {
  int tail = 0;
  Direction dir = Direction::PlusX;
  bool operator==(const DirectedLink&) const = default;
};

struct LinkStep {
  int link;  // stored (forward-oriented) link index
  int sign;  // +1 if traversal matches the stored orientation, -1 otherwise
  int head;
};

struct LinkEnds {
  int tail;
  int head;
};

// Rectangular 2D lattice.
//
// Indexing is fixed and part of the file formats:
//   site (x, y)              -> y * nx + x
//   horizontal link at (x,y) -> y * hx + x,        hx = nx - 1 (open) or nx
//                               connects (x, y) -> (x + 1, y)
//   vertical link at (x, y)  -> H + y * nx + x,    H = number of horizontal links
//                               connects (x, y) -> (x, y + 1)
//   plaquette at (px, py)    -> py * px_count + px, corners (px, py) .. (px+1, py+1)
// Periodic lattices add the wrap links and plaquettes (coordinates taken mod n).
//
// Sites can be excised (hard walls, solenoid interior, restriction of a field to
// a region). Excised sites keep their indices but are absent from regions and
// carry no matter field.
class Lattice {
 public:
  static Lattice build(int nx, int ny, double spacing, Boundary boundary);

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double spacing() const noexcept { return spacing_; }
  Boundary boundary() const noexcept { return boundary_; }
  bool periodic() const noexcept { return boundary_ == Boundary::Periodic; }

  int site_count() const noexcept { return nx_ * ny_; }
  int horizontal_link_count() const noexcept { return hx_ * ny_; }
  int vertical_link_count() const noexcept { return nx_ * vy_; }
  int link_count() const noexcept {
    return horizontal_link_count() + vertical_link_count();
  }
  int plaquette_count() const noexcept { return hx_ * vy_; }
  int plaquettes_x() const noexcept { return hx_; }
  int plaquettes_y() const noexcept { return vy_; }

  int site(int x, int y) const;
  int site_x(int s) const noexcept { return s % nx_; }
  int site_y(int s) const noexcept { return s / nx_; }
  bool on_boundary(int s) const noexcept;

  int horizontal_link(int x, int y) const;
  int vertical_link(int x, int y) const;
  bool is_horizontal(int link) const noexcept {
    return link < horizontal_link_count();
  }
  LinkEnds link_ends(int link) const;

  std::optional<LinkStep> step(int s, Direction d) const;
  std::optional<LinkStep> step(const DirectedLink& l) const {
    return step(l.tail, l.dir);
  }
  // Throws invalid-argument when the link leaves the lattice.
  LinkStep resolve(const DirectedLink& l) const;

  int plaquette(int px, int py) const;
  int plaquette_x(int p) const noexcept { return p % hx_; }
  int plaquette_y(int p) const noexcept { return p / hx_; }
  // Counterclockwise boundary starting at the lower-left corner.
  std::array<DirectedLink, 4> plaquette_boundary(int p) const;
  std::array<int, 4> plaquette_corners(int p) const;

  bool active(int s) const noexcept { return active_[s] != 0; }
  const std::vector<std::uint8_t>& active_mask() const noexcept { return active_; }
  int active_site_count() const noexcept;
  // Both endpoints active.
  bool link_active(int link) const;
  Lattice with_excised(std::span<const int> sites) const;
  Lattice with_active_mask(std::vector<std::uint8_t> mask) const;

  bool same_geometry(const Lattice& other) const noexcept;
  bool operator==(const Lattice& other) const noexcept = default;

 private:
  Lattice() = default;

  int nx_ = 0;
  int ny_ = 0;
  int hx_ = 0;
  int vy_ = 0;
  double spacing_ = 1.0;
  Boundary boundary_ = Boundary::Open;
  std::vector<std::uint8_t> active_;
};

// Site subset of a lattice. Excised sites are never members.
class Region {
 public:
  explicit Region(const Lattice& lattice);  // empty region
  Region(const Lattice& lattice, std::vector<std::uint8_t> mask);

  static Region full(const Lattice& lattice);
  // Inclusive site coordinates; clipped to the lattice.
  static Region rectangle(const Lattice& lattice, int x0, int y0, int x1, int y1);
  static Region from_sites(const Lattice& lattice, std::span<const int> sites);

  const Lattice& lattice() const noexcept { return lattice_; }
  bool contains(int s) const noexcept { return mask_[s] != 0; }
  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
  int size() const noexcept;
  bool empty() const noexcept { return size() == 0; }
  std::vector<int> sites() const;

  std::vector<int> induced_links() const;
  std::vector<int> induced_plaquettes() const;
  bool contains_link(int link) const;

  Region united(const Region& other) const;
  Region intersected(const Region& other) const;
  Region minus(const Region& other) const;

  bool operator==(const Region& other) const noexcept { return mask_ == other.mask_; }

 private:
  void check_compatible(const Region& other) const;

  Lattice lattice_;
  std::vector<std::uint8_t> mask_;
};

std::vector<Region> connected_components(const Region& region);

// Connected and every independent cycle of the induced link graph is filled by
// induced plaquettes. Disconnected regions are reported as not simply
// connected. Periodic lattices are rejected with not-supported.
bool is_simply_connected(const Region& region);

// Closed path of directed links.
struct Loop {
  std::vector<DirectedLink> links;
};

int head_of(const Lattice& lattice, const DirectedLink& l);
void validate_path(const Lattice& lattice, std::span<const DirectedLink> path);
void validate_loop(const Lattice& lattice, const Loop& loop);

// Path through consecutive adjacent sites (each pair must share a link).
std::vector<DirectedLink> path_through_sites(const Lattice& lattice,
                                             std::span<const int> sites);
// Counterclockwise boundary of the inclusive site rectangle [x0,x1] x [y0,y1].
Loop rectangle_loop(const Lattice& lattice, int x0, int y0, int x1, int y1);
Loop reversed(const Lattice& lattice, const Loop& loop);
// Both loops must start at the same site.
Loop concatenated(const Lattice& lattice, const Loop& first, const Loop& second);

// Signed winding number of the loop around each plaquette centre
// (counterclockwise positive); zero entries omitted.
std::map<int, int> enclosed_plaquettes(const Lattice& lattice, const Loop& loop);

}  // namespace abfield
