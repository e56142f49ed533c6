#include "abfield/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "abfield/error.hpp"

namespace abfield {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

class PhaseParser {
 public:
  explicit PhaseParser(std::string_view s) : s_(s) {}

  double parse() {
    const double v = sum();
    skip();
    if (pos_ != s_.size()) fail();
    return v;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail() const {
    config_error("cannot parse number \"" + std::string(s_) + "\"");
  }
  double sum() {
    double v = product();
    for (;;) {
      skip();
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
        const char op = s_[pos_++];
        const double rhs = product();
        v = op == '+' ? v + rhs : v - rhs;
      } else {
        return v;
      }
    }
  }
  double product() {
    double v = factor();
    for (;;) {
      skip();
      if (pos_ < s_.size() && (s_[pos_] == '*' || s_[pos_] == '/')) {
        const char op = s_[pos_++];
        const double rhs = factor();
        v = op == '*' ? v * rhs : v / rhs;
      } else if (at_pi()) {
        v *= factor();
      } else {
        return v;
      }
    }
  }
  bool at_pi() const { return s_.substr(pos_, 2) == "pi"; }
  double factor() {
    skip();
    if (pos_ < s_.size() && s_[pos_] == '-') {
      ++pos_;
      return -factor();
    }
    if (at_pi()) {
      pos_ += 2;
      return std::numbers::pi;
    }
    const char* first = s_.data() + pos_;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
    if (ec != std::errc() || ptr == first) fail();
    pos_ += static_cast<std::size_t>(ptr - first);
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

template <typename T>
T parse_integer(const std::string& key, const std::string& text) {
  T v{};
  const std::string t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    config_error("\"" + key + "\" must be an integer, got \"" + t + "\"");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  try {
    const double v = parse_phase_expression(text);
    if (!std::isfinite(v)) config_error("\"" + key + "\" must be finite");
    return v;
  } catch (const Error&) {
    config_error("\"" + key + "\" must be a number, got \"" + trim(text) + "\"");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  config_error("\"" + key + "\" must be true or false, got \"" + t + "\"");
}

std::vector<double> parse_real_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) config_error("\"" + key + "\" has an empty list entry");
    out.push_back(parse_real(key, item));
  }
  return out;
}

std::pair<int, int> parse_site(const std::string& key, const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) config_error("\"" + key + "\" must be \"x, y\"");
  return {parse_integer<int>(key, parts[0]), parse_integer<int>(key, parts[1])};
}

// Section accessor that records which keys were consumed.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool present() const { return tree_ != nullptr; }
  std::optional<std::string> take(const std::string& key) {
    used_.insert(key);
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (v) return trim(*v);
    return std::nullopt;
  }
  void finish() const {
    if (!tree_) return;
    for (const auto& [k, v] : *tree_) {
      if (!used_.count(k)) config_error("unknown key \"" + k + "\" in section [" + name_ + "]");
      if (!v.empty()) config_error("nested keys are not supported in [" + name_ + "]");
    }
  }
  std::string qualified(const std::string& key) const { return name_ + "." + key; }

  template <typename T>
  void integer(const std::string& key, T& out) {
    if (auto v = take(key)) out = parse_integer<T>(qualified(key), *v);
  }
  void real(const std::string& key, double& out) {
    if (auto v = take(key)) out = parse_real(qualified(key), *v);
  }
  void text(const std::string& key, std::string& out) {
    if (auto v = take(key)) out = *v;
  }
  void boolean(const std::string& key, bool& out) {
    if (auto v = take(key)) out = parse_bool(qualified(key), *v);
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
  std::set<std::string> used_;
};

void require_positive(const std::string& key, double v) {
  if (!(v > 0.0)) config_error("\"" + key + "\" must be positive");
}

std::optional<double> flux_value(Section& s, const char* single, const char* quanta) {
  auto a = s.take(single);
  auto b = s.take(quanta);
  if (a && b) config_error(s.qualified(single) + " and " + s.qualified(quanta) + " are exclusive");
  if (a) return parse_real(s.qualified(single), *a);
  if (b) return 2.0 * std::numbers::pi * parse_real(s.qualified(quanta), *b);
  return std::nullopt;
}

std::vector<double> flux_list(Section& s, const char* single, const char* quanta) {
  auto a = s.take(single);
  auto b = s.take(quanta);
  if (a && b) config_error(s.qualified(single) + " and " + s.qualified(quanta) + " are exclusive");
  if (a) return parse_real_list(s.qualified(single), *a);
  if (b) {
    auto v = parse_real_list(s.qualified(quanta), *b);
    for (auto& x : v) x *= 2.0 * std::numbers::pi;
    return v;
  }
  return {};
}

const std::set<std::string> kSections = {"lattice", "flux",     "regions",      "field",
                                         "check",   "separability", "codependence", "gauge_fix",
                                         "dynamics", "sweep",   "output"};

}  // namespace

double parse_phase_expression(std::string_view text) { return PhaseParser(text).parse(); }

ExperimentConfig parse_config(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    config_error("config parse error at line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [name, sub] : tree) {
    if (!kSections.count(name)) {
      if (sub.empty()) config_error("key \"" + name + "\" outside of any section");
      config_error("unknown section [" + name + "]");
    }
  }
  auto section = [&](const std::string& name) {
    const auto it = tree.find(name);
    return Section(it == tree.not_found() ? nullptr : &it->second, name);
  };

  ExperimentConfig cfg;

  auto lat = section("lattice");
  lat.integer("nx", cfg.lattice.nx);
  lat.integer("ny", cfg.lattice.ny);
  lat.real("spacing", cfg.lattice.spacing);
  if (auto b = lat.take("boundary")) {
    if (*b == "open") cfg.lattice.boundary = Boundary::Open;
    else if (*b == "periodic") cfg.lattice.boundary = Boundary::Periodic;
    else config_error("lattice.boundary must be open or periodic");
  }
  lat.text("excise", cfg.lattice.excise);
  lat.finish();
  if (cfg.lattice.nx < 2 || cfg.lattice.ny < 2) config_error("lattice needs nx, ny >= 2");
  require_positive("lattice.spacing", cfg.lattice.spacing);

  auto flux = section("flux");
  if (flux.present()) {
    FluxSpec f;
    flux.real("center_x", f.center_x);
    flux.real("center_y", f.center_y);
    flux.real("radius", f.radius);
    f.total_flux = flux_value(flux, "e_flux", "flux_quanta").value_or(0.0);
    flux.finish();
    if (f.radius < 0.0) config_error("flux.radius must be nonnegative");
    cfg.flux = f;
  }

  if (const auto it = tree.find("regions"); it != tree.not_found()) {
    for (const auto& [k, v] : it->second) {
      if (!v.empty()) config_error("nested keys are not supported in [regions]");
      cfg.regions[k] = trim(v.data());
    }
  }

  auto field = section("field");
  field.text("source", cfg.field.source);
  field.text("input", cfg.field.input);
  field.real("rho_min", cfg.field.rho_min);
  field.real("gauge_amplitude", cfg.field.gauge_amplitude);
  field.text("zero", cfg.field.zero);
  field.finish();
  if (cfg.field.source != "random" && cfg.field.source != "solenoid" && cfg.field.source != "file") {
    config_error("field.source must be random, solenoid or file");
  }
  if (cfg.field.source == "file" && cfg.field.input.empty()) {
    config_error("field.source = file needs field.input");
  }
  if (cfg.field.source == "solenoid" && !cfg.flux) config_error("field.source = solenoid needs [flux]");

  auto check = section("check");
  check.integer("configs", cfg.check.configs);
  check.integer("loops", cfg.check.loops);
  check.real("rho_min", cfg.check.rho_min);
  check.real("gauge_amplitude", cfg.check.gauge_amplitude);
  check.real("perturbation", cfg.check.perturbation);
  check.real("tolerance", cfg.check.tolerance);
  check.real("roundtrip_tolerance", cfg.check.roundtrip_tolerance);
  check.real("eps", cfg.check.eps);
  check.finish();
  if (cfg.check.configs < 0 || cfg.check.loops < 0) config_error("check counts must be >= 0");
  if (!(cfg.check.rho_min > 0.0)) config_error("check.rho_min must be positive");

  auto sep = section("separability");
  sep.text("x", cfg.separability.x);
  sep.text("y", cfg.separability.y);
  if (auto d = sep.take("delta")) cfg.separability.delta = parse_real("separability.delta", *d);
  sep.real("eps", cfg.separability.eps);
  sep.real("tolerance", cfg.separability.tolerance);
  sep.real("holonomy_tolerance", cfg.separability.holonomy_tolerance);
  sep.finish();

  auto cod = section("codependence");
  cod.text("x", cfg.codependence.x);
  cod.text("y", cfg.codependence.y);
  if (auto a = cod.take("alpha")) {
    std::tie(cfg.codependence.alpha_x, cfg.codependence.alpha_y) = parse_site("codependence.alpha", *a);
    cfg.codependence.have_alpha = true;
  }
  if (auto b = cod.take("beta")) {
    std::tie(cfg.codependence.beta_x, cfg.codependence.beta_y) = parse_site("codependence.beta", *b);
    cfg.codependence.have_beta = true;
  }
  cfg.codependence.e_flux = flux_list(cod, "e_flux", "flux_quanta");
  cod.real("tolerance", cfg.codependence.tolerance);
  cod.real("eps", cfg.codependence.eps);
  cod.finish();

  auto gf = section("gauge_fix");
  gf.text("gauge", cfg.gauge_fix.gauge);
  gf.real("tolerance", cfg.gauge_fix.tolerance);
  gf.real("eps", cfg.gauge_fix.eps);
  gf.finish();
  if (cfg.gauge_fix.gauge != "coulomb" && cfg.gauge_fix.gauge != "unitary") {
    config_error("gauge_fix.gauge must be coulomb or unitary");
  }

  auto dyn = section("dynamics");
  cfg.has_dynamics = dyn.present();
  {
    auto& e = cfg.evolution;
    auto& p = cfg.packet;
    auto& g = cfg.geometry;
    dyn.real("mass", e.mass);
    dyn.real("dt", e.dt);
    dyn.integer("steps", e.steps);
    dyn.real("solver_tol", e.solver_tol);
    dyn.integer("max_iterations", e.max_iterations);
    Absorber a = e.absorber.value_or(Absorber{});
    dyn.integer("absorber_width", a.width);
    dyn.real("absorber_strength", a.strength);
    e.absorber = a.width > 0 && a.strength > 0.0 ? std::optional<Absorber>(a) : std::nullopt;
    dyn.real("packet_x", p.center_x);
    dyn.real("packet_y", p.center_y);
    dyn.real("packet_width", p.width);
    dyn.real("momentum_x", p.momentum_x);
    dyn.real("momentum_y", p.momentum_y);
    dyn.integer("barrier_row", g.barrier_row);
    dyn.integer("barrier_thickness", g.barrier_thickness);
    dyn.integer("slit_width", g.slit_width);
    dyn.real("slit_separation", g.slit_separation);
    dyn.real("solenoid_y", g.solenoid_y);
    dyn.real("solenoid_radius", g.solenoid_radius);
    dyn.integer("screen_row", g.screen_row);
    dyn.real("fit_k_min", g.fit_k_min);
    dyn.real("fit_k_max", g.fit_k_max);
    dyn.finish();
    if (cfg.has_dynamics) {
      g.nx = cfg.lattice.nx;
      g.ny = cfg.lattice.ny;
      g.spacing = cfg.lattice.spacing;
      try {
        validate(e);
        validate(g);
      } catch (const Error& err) {
        config_error(std::string("[dynamics]: ") + err.what());
      }
      if (cfg.lattice.boundary != Boundary::Open) config_error("[dynamics] needs an open lattice");
    }
  }

  auto sweep = section("sweep");
  cfg.sweep.e_flux = flux_list(sweep, "e_flux", "flux_quanta");
  sweep.real("tolerance", cfg.sweep.tolerance);
  sweep.boolean("write_observables", cfg.sweep.write_observables);
  sweep.finish();

  auto out = section("output");
  out.text("directory", cfg.output.directory);
  out.text("format", cfg.output.format);
  out.integer("seed", cfg.output.seed);
  out.finish();
  if (cfg.output.format != "json" && cfg.output.format != "csv" && cfg.output.format != "binary") {
    config_error("output.format must be json, csv or binary");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

Region eval_region(std::string_view literal, const Lattice& lat,
                   const std::map<std::string, std::string>& named, std::set<std::string>& active);

Region eval_term(const std::string& term, const Lattice& lat,
                 const std::map<std::string, std::string>& named, std::set<std::string>& active) {
  if (term == "all") return Region::full(lat);
  if (term.rfind("rect(", 0) == 0) {
    if (term.back() != ')') config_error("region term \"" + term + "\" is missing ')'");
    const auto args = split(std::string_view(term).substr(5, term.size() - 6), ',');
    if (args.size() != 4) config_error("rect() takes four coordinates: \"" + term + "\"");
    int v[4];
    for (int i = 0; i < 4; ++i) v[i] = parse_integer<int>("rect", args[i]);
    for (int i = 0; i < 4; ++i) {
      const int limit = (i % 2 == 0 ? lat.nx() : lat.ny()) - 1;
      if (v[i] < 0 || v[i] > limit) {
        config_error("rect coordinate " + std::to_string(v[i]) + " outside the lattice in \"" +
                     term + "\"");
      }
    }
    return Region::rectangle(lat, v[0], v[1], v[2], v[3]);
  }
  const auto it = named.find(term);
  if (it == named.end()) config_error("unknown region \"" + term + "\"");
  if (active.count(term)) config_error("region \"" + term + "\" refers to itself");
  active.insert(term);
  Region r = eval_region(it->second, lat, named, active);
  active.erase(term);
  return r;
}

Region eval_region(std::string_view literal, const Lattice& lat,
                   const std::map<std::string, std::string>& named, std::set<std::string>& active) {
  Region acc(lat);
  char op = '+';
  std::size_t start = 0;
  int depth = 0;
  bool any = false;
  for (std::size_t i = 0; i <= literal.size(); ++i) {
    const char ch = i < literal.size() ? literal[i] : '\0';
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    const bool boundary = i == literal.size() || (depth == 0 && (ch == '+' || ch == '-'));
    if (!boundary) continue;
    const std::string term = trim(literal.substr(start, i - start));
    if (term.empty()) config_error("empty term in region \"" + std::string(literal) + "\"");
    const Region r = eval_term(term, lat, named, active);
    acc = op == '+' ? acc.united(r) : acc.minus(r);
    any = true;
    op = ch;
    start = i + 1;
  }
  if (!any || depth != 0) config_error("malformed region \"" + std::string(literal) + "\"");
  return acc;
}

}  // namespace

Region parse_region(std::string_view literal, const Lattice& lattice,
                    const std::map<std::string, std::string>& named) {
  std::set<std::string> active;
  return eval_region(literal, lattice, named, active);
}

}  // namespace abfield
