#include "abfield/io.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <random>

#include "abfield/error.hpp"

namespace abfield {

namespace {

using nlohmann::json;

constexpr const char* kFieldFormat = "abfield/field-config";
constexpr const char* kInvariantFormat = "abfield/invariant-state";
constexpr std::uint32_t kKindField = 1;
constexpr std::uint32_t kKindInvariants = 2;

std::vector<int> excised_sites(const Lattice& lat) {
  std::vector<int> out;
  for (int s = 0; s < lat.site_count(); ++s) {
    if (!lat.active(s)) out.push_back(s);
  }
  return out;
}

json lattice_json(const Lattice& lat) {
  return json{{"nx", lat.nx()},
              {"ny", lat.ny()},
              {"spacing", lat.spacing()},
              {"boundary", lat.periodic() ? "periodic" : "open"},
              {"excised", excised_sites(lat)}};
}

json links_json(const Lattice& lat, const std::vector<double>& values) {
  const auto h = values.begin() + lat.horizontal_link_count();
  return json{{"horizontal", std::vector<double>(values.begin(), h)},
              {"vertical", std::vector<double>(h, values.end())}};
}

Lattice build_lattice(int nx, int ny, double spacing, Boundary b, const std::vector<long long>& ex,
                      std::size_t offset) {
  Lattice lat = [&] {
    try {
      return Lattice::build(nx, ny, spacing, b);
    } catch (const Error& e) {
      throw LoadError(std::string("invalid lattice: ") + e.what(), offset);
    }
  }();
  std::vector<int> sites;
  sites.reserve(ex.size());
  for (long long s : ex) {
    if (s < 0 || s >= lat.site_count()) {
      throw LoadError("excised site index " + std::to_string(s) + " out of range", offset);
    }
    sites.push_back(static_cast<int>(s));
  }
  return lat.with_excised(sites);
}

void check_excised_zero(const FieldConfig& c, std::size_t offset) {
  for (int s = 0; s < c.lattice.site_count(); ++s) {
    if (!c.lattice.active(s) && c.psi[s] != Complex{0.0, 0.0}) {
      throw LoadError("nonzero psi on excised site " + std::to_string(s), offset);
    }
  }
}

// JSON ---------------------------------------------------------------------

template <typename T>
T get(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw LoadError(std::string("missing key \"") + key + "\"", 0);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw LoadError(std::string("bad value for \"") + key + "\": " + e.what(), 0);
  }
}

Lattice lattice_from_json(const json& j) {
  const json lj = get<json>(j, "lattice");
  const auto boundary = get<std::string>(lj, "boundary");
  if (boundary != "open" && boundary != "periodic") {
    throw LoadError("boundary must be \"open\" or \"periodic\"", 0);
  }
  return build_lattice(get<int>(lj, "nx"), get<int>(lj, "ny"), get<double>(lj, "spacing"),
                       boundary == "open" ? Boundary::Open : Boundary::Periodic,
                       get<std::vector<long long>>(lj, "excised"), 0);
}

std::vector<double> links_from_json(const json& j, const Lattice& lat, const char* key) {
  const json lj = get<json>(j, key);
  auto h = get<std::vector<double>>(lj, "horizontal");
  const auto v = get<std::vector<double>>(lj, "vertical");
  if (h.size() != static_cast<std::size_t>(lat.horizontal_link_count()) ||
      v.size() != static_cast<std::size_t>(lat.vertical_link_count())) {
    throw LoadError(std::string("\"") + key + "\" has the wrong number of entries", 0);
  }
  h.insert(h.end(), v.begin(), v.end());
  return h;
}

StateDocument parse_json(std::span<const std::uint8_t> bytes) {
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw LoadError(std::string("malformed JSON: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  const auto format = get<std::string>(j, "format");
  const auto version = get<std::uint32_t>(j, "version");
  if (version != kFormatVersion) {
    throw LoadError("unsupported version " + std::to_string(version), 0);
  }
  const Lattice lat = lattice_from_json(j);
  const auto n = static_cast<std::size_t>(lat.site_count());
  if (format == kFieldFormat) {
    FieldConfig c(lat);
    const auto psi = get<std::vector<std::array<double, 2>>>(j, "psi");
    if (psi.size() != n) throw LoadError("\"psi\" has the wrong number of entries", 0);
    for (std::size_t s = 0; s < n; ++s) c.psi[s] = {psi[s][0], psi[s][1]};
    c.links = links_from_json(j, lat, "links");
    check_excised_zero(c, 0);
    return c;
  }
  if (format == kInvariantFormat) {
    InvariantState st{lat, get<std::vector<double>>(j, "rho"), links_from_json(j, lat, "d")};
    if (st.rho.size() != n) throw LoadError("\"rho\" has the wrong number of entries", 0);
    return st;
  }
  throw LoadError("unknown format \"" + format + "\"", 0);
}

// Binary -------------------------------------------------------------------

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  std::size_t offset() const { return pos_; }
  void need(std::size_t n, const char* what) {
    if (b_.size() - pos_ < n) {
      throw LoadError(std::string("truncated file: expected ") + what, pos_);
    }
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return b_[pos_++];
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

void write_header(Writer& w, std::uint32_t kind, const Lattice& lat) {
  w.bytes(kBinaryMagic, sizeof kBinaryMagic);
  w.u32(kFormatVersion);
  w.u32(kind);
  w.u32(static_cast<std::uint32_t>(lat.nx()));
  w.u32(static_cast<std::uint32_t>(lat.ny()));
  w.f64(lat.spacing());
  w.u8(static_cast<std::uint8_t>(lat.boundary()));
  for (int i = 0; i < 3; ++i) w.u8(0);
  const auto ex = excised_sites(lat);
  w.u32(static_cast<std::uint32_t>(ex.size()));
  for (int s : ex) w.u32(static_cast<std::uint32_t>(s));
}

StateDocument parse_binary(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.need(sizeof kBinaryMagic, "magic");
  if (std::memcmp(bytes.data(), kBinaryMagic, sizeof kBinaryMagic) != 0) {
    throw LoadError("bad magic", 0);
  }
  for (std::size_t i = 0; i < sizeof kBinaryMagic; ++i) r.u8("magic");
  const std::size_t version_at = r.offset();
  const auto version = r.u32("version");
  if (version != kFormatVersion) {
    throw LoadError("unsupported version " + std::to_string(version), version_at);
  }
  const std::size_t kind_at = r.offset();
  const auto kind = r.u32("kind");
  if (kind != kKindField && kind != kKindInvariants) {
    throw LoadError("unknown kind " + std::to_string(kind), kind_at);
  }
  const std::size_t lattice_at = r.offset();
  const auto nx = r.u32("nx");
  const auto ny = r.u32("ny");
  const double spacing = r.f64("spacing");
  const std::size_t boundary_at = r.offset();
  const auto boundary = r.u8("boundary");
  for (int i = 0; i < 3; ++i) {
    if (r.u8("padding") != 0) throw LoadError("nonzero header padding", r.offset() - 1);
  }
  if (boundary > 1) throw LoadError("bad boundary code", boundary_at);
  if (nx > 1u << 15 || ny > 1u << 15) throw LoadError("lattice dimensions too large", lattice_at);
  const std::size_t count_at = r.offset();
  const auto count = r.u32("excised count");
  if (count > nx * ny) throw LoadError("excised count exceeds site count", count_at);
  std::vector<long long> ex(count);
  for (auto& s : ex) s = r.u32("excised site index");
  const Lattice lat = build_lattice(static_cast<int>(nx), static_cast<int>(ny), spacing,
                                    static_cast<Boundary>(boundary), ex, lattice_at);
  const int n = lat.site_count();
  const int links = lat.link_count();
  const std::size_t data_at = r.offset();
  StateDocument doc = [&]() -> StateDocument {
    if (kind == kKindField) {
      FieldConfig c(lat);
      for (int s = 0; s < n; ++s) {
        const double re = r.f64("psi");
        const double im = r.f64("psi");
        c.psi[s] = {re, im};
      }
      for (int l = 0; l < links; ++l) c.links[l] = r.f64("link phase");
      check_excised_zero(c, data_at);
      return c;
    }
    InvariantState st{lat, std::vector<double>(n), std::vector<double>(links)};
    for (auto& v : st.rho) v = r.f64("rho");
    for (auto& v : st.d) v = r.f64("d");
    return st;
  }();
  if (r.offset() != bytes.size()) throw LoadError("trailing bytes after payload", r.offset());
  return doc;
}

}  // namespace

std::string to_json(const FieldConfig& c) {
  json psi = json::array();
  for (const auto& p : c.psi) psi.push_back({p.real(), p.imag()});
  const json j{{"format", kFieldFormat},
               {"version", kFormatVersion},
               {"lattice", lattice_json(c.lattice)},
               {"psi", std::move(psi)},
               {"links", links_json(c.lattice, c.links)}};
  return j.dump() + "\n";
}

std::string to_json(const InvariantState& s) {
  const json j{{"format", kInvariantFormat},
               {"version", kFormatVersion},
               {"lattice", lattice_json(s.lattice)},
               {"rho", s.rho},
               {"d", links_json(s.lattice, s.d)}};
  return j.dump() + "\n";
}

std::vector<std::uint8_t> to_binary(const FieldConfig& c) {
  Writer w;
  write_header(w, kKindField, c.lattice);
  for (const auto& p : c.psi) {
    w.f64(p.real());
    w.f64(p.imag());
  }
  for (double a : c.links) w.f64(a);
  return w.take();
}

std::vector<std::uint8_t> to_binary(const InvariantState& s) {
  Writer w;
  write_header(w, kKindInvariants, s.lattice);
  for (double v : s.rho) w.f64(v);
  for (double v : s.d) w.f64(v);
  return w.take();
}

StateDocument parse_state(std::span<const std::uint8_t> bytes) {
  for (std::uint8_t b : bytes) {
    if (std::isspace(b)) continue;
    return b == '{' ? parse_json(bytes) : parse_binary(bytes);
  }
  throw LoadError("empty file", 0);
}

FieldConfig parse_field(std::span<const std::uint8_t> bytes) {
  auto doc = parse_state(bytes);
  if (auto* c = std::get_if<FieldConfig>(&doc)) return std::move(*c);
  throw LoadError("expected a field configuration, found an invariant state", 0);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::random_device rd;
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw Error(ErrorCode::IoError, "write to " + tmp.string() + " failed");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename into " + path.string());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void save_state(const std::filesystem::path& path, const StateDocument& doc, FileFormat format) {
  std::visit(
      [&](const auto& v) {
        if (format == FileFormat::Json) write_file_atomic(path, to_json(v));
        else write_file_atomic(path, to_binary(v));
      },
      doc);
}

StateDocument load_state(const std::filesystem::path& path) { return parse_state(read_file(path)); }

FieldConfig load_field(const std::filesystem::path& path) { return parse_field(read_file(path)); }

}  // namespace abfield
