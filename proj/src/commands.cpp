#include "abfield/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <json.hpp>
#include <numeric>

#include "abfield/dynamics.hpp"
#include "abfield/error.hpp"
#include "abfield/holonomy.hpp"
#include "abfield/io.hpp"
#include "abfield/phase.hpp"
#include "abfield/rng.hpp"
#include "abfield/separability.hpp"

namespace abfield {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Context {
  std::string command;
  ExperimentConfig cfg;
  std::uint64_t seed;
  std::string format;
  fs::path out;
  CommandReport report;

  void write(const std::string& name, std::string_view text) {
    write_file_atomic(out / name, text);
    report.files.push_back(name);
  }
  void write(const std::string& name, std::span<const std::uint8_t> bytes) {
    write_file_atomic(out / name, bytes);
    report.files.push_back(name);
  }
  void write_state(const std::string& stem, const StateDocument& doc) {
    if (format == "binary") {
      write(stem + ".bin", std::visit([](const auto& v) { return to_binary(v); }, doc));
    } else if (format == "csv") {
      write_state_csv(stem, doc);
    } else {
      write(stem + ".json", std::visit([](const auto& v) { return to_json(v); }, doc));
    }
  }

 private:
  void write_state_csv(const std::string& stem, const StateDocument& doc) {
    const Lattice& lat = std::visit([](const auto& v) -> const Lattice& { return v.lattice; }, doc);
    std::string sites, links;
    if (const auto* c = std::get_if<FieldConfig>(&doc)) {
      sites = "site,x,y,active,re,im\n";
      for (int s = 0; s < lat.site_count(); ++s) {
        sites += std::to_string(s) + "," + std::to_string(lat.site_x(s)) + "," +
                 std::to_string(lat.site_y(s)) + "," + (lat.active(s) ? "1" : "0") + "," +
                 num(c->psi[s].real()) + "," + num(c->psi[s].imag()) + "\n";
      }
      links = link_csv(lat, c->links, "a");
    } else {
      const auto& st = std::get<InvariantState>(doc);
      sites = "site,x,y,active,rho\n";
      for (int s = 0; s < lat.site_count(); ++s) {
        sites += std::to_string(s) + "," + std::to_string(lat.site_x(s)) + "," +
                 std::to_string(lat.site_y(s)) + "," + (lat.active(s) ? "1" : "0") + "," +
                 num(st.rho[s]) + "\n";
      }
      links = link_csv(lat, st.d, "d");
    }
    write(stem + "_sites.csv", sites);
    write(stem + "_links.csv", links);
  }
  static std::string link_csv(const Lattice& lat, const std::vector<double>& v, const char* name) {
    std::string out = std::string("link,tail,head,") + name + "\n";
    for (int l = 0; l < lat.link_count(); ++l) {
      const auto e = lat.link_ends(l);
      out += std::to_string(l) + "," + std::to_string(e.tail) + "," + std::to_string(e.head) + "," +
             num(v[l]) + "\n";
    }
    return out;
  }
};

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

Lattice build_lattice(const ExperimentConfig& cfg) {
  const auto& b = cfg.lattice;
  Lattice lat = Lattice::build(b.nx, b.ny, b.spacing, b.boundary);
  if (!b.excise.empty()) {
    const auto sites = parse_region(b.excise, lat, cfg.regions).sites();
    lat = lat.with_excised(sites);
  }
  return lat;
}

Region named_region(const ExperimentConfig& cfg, const std::string& name, const Lattice& lat) {
  if (!cfg.regions.count(name)) config_error("region \"" + name + "\" is not defined in [regions]");
  return parse_region(name, lat, cfg.regions);
}

json region_summary(const Region& r) {
  const auto& lat = r.lattice();
  int x0 = lat.nx(), y0 = lat.ny(), x1 = -1, y1 = -1;
  for (int s : r.sites()) {
    x0 = std::min(x0, lat.site_x(s));
    x1 = std::max(x1, lat.site_x(s));
    y0 = std::min(y0, lat.site_y(s));
    y1 = std::max(y1, lat.site_y(s));
  }
  return json{{"size", r.size()}, {"bounding_box", {x0, y0, x1, y1}}};
}

// Closed walk that never uses periodic wrap links, so it is contractible
// whenever it avoids excised plaquettes.
Loop random_plain_walk(const Lattice& lat, Rng& rng, int steps) {
  auto move = [&](int s, Direction d) -> std::optional<int> {
    const int x = lat.site_x(s), y = lat.site_y(s);
    const int nx = x + (d == Direction::PlusX) - (d == Direction::MinusX);
    const int ny = y + (d == Direction::PlusY) - (d == Direction::MinusY);
    if (nx < 0 || ny < 0 || nx >= lat.nx() || ny >= lat.ny()) return std::nullopt;
    return lat.site(nx, ny);
  };
  const int start = rng.below(lat.site_count());
  std::vector<int> sites{start};
  int s = start;
  for (int i = 0; i < steps; ++i) {
    if (auto n = move(s, kAllDirections[rng.below(4)])) {
      s = *n;
      sites.push_back(s);
    }
  }
  while (s != start) {
    const int dx = lat.site_x(start) - lat.site_x(s);
    const int dy = lat.site_y(start) - lat.site_y(s);
    const Direction d = dx != 0 ? (dx > 0 ? Direction::PlusX : Direction::MinusX)
                                : (dy > 0 ? Direction::PlusY : Direction::MinusY);
    s = *move(s, d);
    sites.push_back(s);
  }
  if (sites.size() < 3) {
    const int n = move(start, Direction::PlusX).value_or(*move(start, Direction::MinusX));
    sites = {start, n, start};
  }
  return Loop{path_through_sites(lat, sites)};
}

Loop random_rectangle(const Lattice& lat, Rng& rng) {
  int x0 = rng.below(lat.nx()), x1 = rng.below(lat.nx());
  int y0 = rng.below(lat.ny()), y1 = rng.below(lat.ny());
  if (x0 == x1) x1 = x0 == 0 ? 1 : x0 - 1;
  if (y0 == y1) y1 = y0 == 0 ? 1 : y0 - 1;
  return rectangle_loop(lat, std::min(x0, x1), std::min(y0, y1), std::max(x0, x1), std::max(y0, y1));
}

bool all_active(const Lattice& lat, const Loop& loop) {
  return std::all_of(loop.links.begin(), loop.links.end(),
                     [&](const DirectedLink& l) { return lat.active(l.tail); });
}

void cmd_check_invariance(Context& ctx) {
  const auto& chk = ctx.cfg.check;
  const Lattice lat = build_lattice(ctx.cfg);
  struct Suite {
    int passed = 0, failed = 0;
    double worst = 0.0;
    json to_json() const { return {{"passed", passed}, {"failed", failed}, {"worst_residual", worst}}; }
  } invariance, completeness, roundtrip;
  int passed = 0, failed = 0;
  json failures = json::array();
  for (int i = 0; i < chk.configs; ++i) {
    const std::uint64_t s = ctx.seed + 1000003ull * static_cast<std::uint64_t>(i);
    const FieldConfig c = random_config(lat, s, chk.rho_min);
    const FieldConfig cg = apply_gauge(c, random_gauge(lat, s + 1, chk.gauge_amplitude));
    const InvariantState inv = extract_invariants(c, chk.eps);

    const double r_inv = invariant_distance(inv, extract_invariants(cg, chk.eps));
    const bool ok_inv = r_inv < chk.tolerance;

    const auto w = gauge_equivalent(c, cg, chk.eps, chk.roundtrip_tolerance);
    const double r_eq = w ? gauge_residual(c, cg, *w) : INFINITY;
    FieldConfig bad = cg;
    Rng pick(s + 2);
    int link = pick.below(lat.link_count());
    while (!lat.link_active(link)) link = pick.below(lat.link_count());
    bad.links[link] += chk.perturbation;
    const bool ok_eq = w && r_eq <= chk.roundtrip_tolerance &&
                       !gauge_equivalent(c, bad, chk.eps, chk.roundtrip_tolerance);

    const FieldConfig rec = reconstruct(inv);
    const auto wr = gauge_equivalent(c, rec, chk.eps, chk.roundtrip_tolerance);
    const double r_rt = wr ? gauge_residual(c, rec, *wr) : INFINITY;
    const bool ok_rt = wr && r_rt <= chk.roundtrip_tolerance;

    auto tally = [](Suite& suite, bool ok, double r) {
      (ok ? suite.passed : suite.failed)++;
      suite.worst = std::max(suite.worst, r);
    };
    tally(invariance, ok_inv, r_inv);
    tally(completeness, ok_eq, r_eq);
    tally(roundtrip, ok_rt, r_rt);
    if (ok_inv && ok_eq && ok_rt) {
      ++passed;
    } else {
      ++failed;
      failures.push_back({{"index", i}, {"seed", s}, {"invariance", ok_inv},
                          {"completeness", ok_eq}, {"roundtrip", ok_rt}});
    }
  }
  ctx.report.passed = failed == 0;
  json body{{"command", ctx.command},
            {"configs", chk.configs},
            {"seed", ctx.seed},
            {"passed", passed},
            {"failed", failed},
            {"worst_residual", invariance.worst},
            {"tolerance", chk.tolerance},
            {"suites",
             {{"invariance", invariance.to_json()},
              {"completeness", completeness.to_json()},
              {"roundtrip", roundtrip.to_json()}}},
            {"failures", failures}};
  ctx.report.json = body.dump(2);
}

void cmd_check_stokes(Context& ctx) {
  const auto& chk = ctx.cfg.check;
  const Lattice lat = build_lattice(ctx.cfg);
  const int configs = std::max(1, std::min(chk.configs, std::max(1, chk.loops / 10)));
  std::vector<FieldConfig> fields;
  for (int i = 0; i < configs; ++i) {
    fields.push_back(random_config(lat, ctx.seed + 7919ull * static_cast<std::uint64_t>(i), chk.rho_min));
  }
  Rng rng(ctx.seed ^ 0x5bd1e995ull);
  int passed = 0, failed = 0, skipped = 0;
  double worst = 0.0;
  json failures = json::array();
  for (int j = 0; j < chk.loops; ++j) {
    const FieldConfig& c = fields[j % configs];
    const Loop loop = j % 2 == 0 ? random_rectangle(lat, rng)
                                 : random_plain_walk(lat, rng, 4 + rng.below(60));
    if (!all_active(lat, loop)) {
      ++skipped;
      continue;
    }
    try {
      const double r = stokes_residual(c, loop);
      worst = std::max(worst, r);
      if (r <= chk.tolerance) {
        ++passed;
      } else {
        ++failed;
        failures.push_back({{"loop", j}, {"residual", r}});
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotContractible) throw;
      ++skipped;
    }
  }
  ctx.report.passed = failed == 0;
  ctx.report.json = json{{"command", ctx.command},
                         {"loops", chk.loops},
                         {"configs", configs},
                         {"seed", ctx.seed},
                         {"passed", passed},
                         {"failed", failed},
                         {"skipped", skipped},
                         {"worst_residual", worst},
                         {"tolerance", chk.tolerance},
                         {"failures", failures}}
                        .dump(2);
}

void cmd_separability(Context& ctx) {
  const auto& sep = ctx.cfg.separability;
  const FieldConfig c = build_field(ctx.cfg, ctx.seed);
  const Region x = named_region(ctx.cfg, sep.x, c.lattice);
  const Region y = named_region(ctx.cfg, sep.y, c.lattice);
  const CoverAnalysis a = analyze_cover(c, x, y, sep.eps);

  json comps = json::array();
  for (std::size_t i = 0; i < a.overlap_components.size(); ++i) {
    json r = region_summary(a.overlap_components[i]);
    r["zero"] = static_cast<bool>(a.component_is_zero[i]);
    comps.push_back(r);
  }
  json body{{"command", ctx.command},
            {"seed", ctx.seed},
            {"x", {{"name", sep.x}, {"region", region_summary(a.x)}}},
            {"y", {{"name", sep.y}, {"region", region_summary(a.y)}}},
            {"overlap_components", comps},
            {"zero_components", a.zero_components.size()},
            {"threshold", a.threshold},
            {"eps", sep.eps},
            {"nonseparable", a.nonseparable},
            {"diagnostics", a.diagnostics},
            {"witness", nullptr}};
  bool ok = true;
  if (sep.delta && a.nonseparable) {
    const FieldConfig w = construct_witness(c, a, *sep.delta);
    const WitnessCheck chk = verify_witness(c, w, a, sep.eps, sep.tolerance);
    // Loop through the first zero component and another overlap component.
    const Region& zero = a.zero_components.front();
    const int alpha = zero.sites().front();
    const auto other = std::find_if(a.overlap_components.begin(), a.overlap_components.end(),
                                    [&](const Region& r) { return !(r == zero); });
    const int beta = other->sites().front();
    Loop loop{shortest_path(a.y, alpha, beta)};
    const auto back = shortest_path(a.x, alpha, beta);
    for (auto it = back.rbegin(); it != back.rend(); ++it) {
      loop.links.push_back({head_of(c.lattice, *it), opposite(it->dir)});
    }
    const double diff = holonomy(w, loop).raw - holonomy(c, loop).raw;
    const double hol_err = circular_distance(diff, *sep.delta);
    ok = chk.passed() && chk.x_residual <= sep.tolerance && chk.y_residual <= sep.tolerance &&
         hol_err <= sep.holonomy_tolerance;
    body["witness"] = {{"delta", *sep.delta},
                       {"restriction_x_equivalent", chk.x_equivalent},
                       {"restriction_y_equivalent", chk.y_equivalent},
                       {"restriction_x_residual", chk.x_residual},
                       {"restriction_y_residual", chk.y_residual},
                       {"whole_equivalent", chk.whole_equivalent},
                       {"holonomy_difference", wrap_phase(diff)},
                       {"holonomy_error", hol_err},
                       {"loop_start", alpha},
                       {"loop_length", loop.links.size()},
                       {"passed", ok}};
    ctx.write_state("original", c);
    ctx.write_state("witness", w);
  } else if (sep.delta) {
    body["witness_note"] = "cover is separable; no witness exists";
  }
  ctx.report.passed = ok;
  ctx.report.json = body.dump(2);
}

void cmd_codependence(Context& ctx) {
  const auto& cod = ctx.cfg.codependence;
  if (!ctx.cfg.flux) config_error("codependence needs a [flux] section");
  if (!cod.have_alpha || !cod.have_beta) config_error("codependence needs alpha and beta sites");
  std::vector<double> fluxes = cod.e_flux;
  if (fluxes.empty()) fluxes.push_back(ctx.cfg.flux->total_flux);
  ExperimentConfig cfg = ctx.cfg;
  cfg.field.source = "solenoid";
  json points = json::array();
  bool ok = true;
  for (double f : fluxes) {
    const FieldConfig c = build_field(cfg, ctx.seed, f);
    const Lattice& lat = c.lattice;
    const Region x = named_region(cfg, cod.x, lat);
    const Region y = named_region(cfg, cod.y, lat);
    auto site = [&](int sx, int sy, const char* which) {
      if (sx < 0 || sy < 0 || sx >= lat.nx() || sy >= lat.ny()) {
        config_error(std::string("codependence.") + which + " lies outside the lattice");
      }
      return lat.site(sx, sy);
    };
    const auto r = codependence_check(c, x, y, site(cod.alpha_x, cod.alpha_y, "alpha"),
                                      site(cod.beta_x, cod.beta_y, "beta"), cod.eps);
    const double vs_flux = circular_distance(r.theta_x - r.theta_y, f);
    const bool pass = r.residual <= cod.tolerance && vs_flux <= cod.tolerance;
    ok = ok && pass;
    points.push_back({{"e_flux", f},
                      {"theta_x", r.theta_x},
                      {"theta_y", r.theta_y},
                      {"holonomy", r.holonomy},
                      {"residual", r.residual},
                      {"residual_vs_flux", vs_flux},
                      {"loop_length", r.loop.links.size()},
                      {"passed", pass}});
  }
  ctx.report.passed = ok;
  ctx.report.json = json{{"command", ctx.command},
                         {"seed", ctx.seed},
                         {"tolerance", cod.tolerance},
                         {"points", points}}
                        .dump(2);
}

double max_interior_divergence(const FieldConfig& c) {
  const auto div = lattice_divergence(c);
  double m = 0.0;
  for (int s = 0; s < c.lattice.site_count(); ++s) {
    if (c.lattice.active(s) && !c.lattice.on_boundary(s)) m = std::max(m, std::abs(div[s]));
  }
  return m;
}

void cmd_gauge_fix(Context& ctx) {
  const auto& gf = ctx.cfg.gauge_fix;
  const FieldConfig c = build_field(ctx.cfg, ctx.seed);
  const FieldConfig fixed =
      gf.gauge == "coulomb" ? coulomb_gauge_fix(c, gf.tolerance) : unitary_gauge_fix(c, gf.eps);
  const auto w = gauge_equivalent_general(c, fixed, gf.eps, std::max(1e-8, gf.tolerance));
  json body{{"command", ctx.command},
            {"gauge", gf.gauge},
            {"seed", ctx.seed},
            {"divergence_before", max_interior_divergence(c)},
            {"divergence_after", max_interior_divergence(fixed)},
            {"equivalent", w.has_value()},
            {"equivalence_residual", w ? gauge_residual(c, fixed, *w) : INFINITY}};
  bool ok = w.has_value();
  if (gf.gauge == "coulomb") {
    ok = ok && max_interior_divergence(fixed) <= gf.tolerance;
  } else {
    double imag = 0.0;
    for (const auto& p : fixed.psi) imag = std::max(imag, std::abs(p.imag()));
    body["max_imaginary_part"] = imag;
    ok = ok && imag == 0.0;
  }
  if (zero_field_sites(c, gf.eps).empty()) {
    body["invariant_distance"] =
        invariant_distance(extract_invariants(c, gf.eps), extract_invariants(fixed, gf.eps));
  }
  body["passed"] = ok;
  ctx.write_state("fixed", fixed);
  ctx.report.passed = ok;
  ctx.report.json = body.dump(2);
}

json state_summary(const StateDocument& doc) {
  const Lattice& lat = std::visit([](const auto& v) -> const Lattice& { return v.lattice; }, doc);
  json j{{"nx", lat.nx()},
         {"ny", lat.ny()},
         {"spacing", lat.spacing()},
         {"boundary", lat.periodic() ? "periodic" : "open"},
         {"sites", lat.site_count()},
         {"links", lat.link_count()},
         {"excised", lat.site_count() - lat.active_site_count()}};
  if (const auto* c = std::get_if<FieldConfig>(&doc)) {
    double m = 0.0;
    for (const auto& p : c->psi) m = std::max(m, std::abs(p));
    j["kind"] = "field-config";
    j["max_abs_psi"] = m;
    j["zero_sites"] = zero_field_sites(*c, kDefaultEps).size();
  } else {
    j["kind"] = "invariant-state";
  }
  return j;
}

void cmd_dump(Context& ctx) {
  const FieldConfig c = build_field(ctx.cfg, ctx.seed);
  ctx.write_state("field", c);
  json body{{"command", ctx.command}, {"seed", ctx.seed}, {"field", state_summary(c)}};
  if (zero_field_sites(c, kDefaultEps).empty()) {
    ctx.write_state("invariants", extract_invariants(c));
    body["invariants"] = true;
  } else {
    body["invariants"] = false;
    body["note"] = "psi vanishes somewhere; invariant state not written";
  }
  body["format"] = ctx.format;
  ctx.report.passed = true;
  ctx.report.json = body.dump(2);
}

void cmd_load(Context& ctx, const std::optional<std::string>& input) {
  std::string path = input.value_or(ctx.cfg.field.input);
  if (path.empty()) config_error("load needs an input file");
  const StateDocument doc = load_state(path);
  json body{{"command", ctx.command}, {"input", path}, {"state", state_summary(doc)}};
  ctx.write_state("loaded", doc);
  body["format"] = ctx.format;
  ctx.report.passed = true;
  ctx.report.json = body.dump(2);
}

std::string profile_csv(const std::vector<double>& intensity) {
  std::string out = "x,intensity\n";
  for (std::size_t i = 0; i < intensity.size(); ++i) out += std::to_string(i) + "," + num(intensity[i]) + "\n";
  return out;
}

std::string observables_csv(const std::vector<StepObservables>& obs) {
  std::string out = "step,norm,screen_accumulated,transmitted\n";
  for (const auto& o : obs) {
    out += std::to_string(o.step) + "," + num(o.norm) + "," + num(o.screen_accumulated) + "," +
           num(o.transmitted) + "\n";
  }
  return out;
}

void cmd_ab_sweep(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (!cfg.has_dynamics) config_error("ab-sweep needs a [dynamics] section");
  if (cfg.sweep.e_flux.empty()) config_error("ab-sweep needs a nonempty sweep.e_flux list");
  std::vector<double> fluxes = cfg.sweep.e_flux;
  std::stable_sort(fluxes.begin(), fluxes.end());

  const AbReference ref = ab_reference(cfg.geometry, cfg.evolution, cfg.packet);
  ctx.write("reference_profile.csv", profile_csv(ref.run.intensity));
  if (cfg.sweep.write_observables) ctx.write("reference_observables.csv", observables_csv(ref.run.observables));

  std::string summary = "e_flux,extracted_shift,predicted_shift,abs_error,fit_quality,status\n";
  json points = json::array();
  bool ok = true;
  for (std::size_t i = 0; i < fluxes.size(); ++i) {
    const double f = fluxes[i];
    char stem[32];
    std::snprintf(stem, sizeof stem, "point_%03zu", i);
    json p{{"index", i}, {"e_flux", f}, {"predicted_shift", predicted_shift(f)}};
    try {
      const FringeResult r = ab_experiment(cfg.geometry, f, cfg.evolution, cfg.packet, &ref);
      const double err = circular_distance(r.extracted_shift, predicted_shift(f));
      const bool pass = err <= cfg.sweep.tolerance;
      ok = ok && pass;
      ctx.write(std::string(stem) + "_profile.csv", profile_csv(r.intensity));
      if (cfg.sweep.write_observables) {
        ctx.write(std::string(stem) + "_observables.csv", observables_csv(r.observables));
      }
      summary += num(f) + "," + num(r.extracted_shift) + "," + num(predicted_shift(f)) + "," +
                 num(err) + "," + num(r.fit_quality) + "," + (pass ? "ok" : "out-of-tolerance") + "\n";
      p.update({{"extracted_shift", r.extracted_shift},
                {"abs_error", err},
                {"fit_quality", r.fit_quality},
                {"transmitted", r.transmitted},
                {"status", pass ? "ok" : "out-of-tolerance"}});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ExperimentFailure && e.code() != ErrorCode::ConvergenceFailure) throw;
      ok = false;
      summary += num(f) + ",," + num(predicted_shift(f)) + ",,," + error_code_name(e.code()) + "\n";
      p.update({{"status", error_code_name(e.code())}, {"message", e.what()}});
    }
    points.push_back(p);
  }
  ctx.write("summary.csv", summary);
  json body{{"command", ctx.command},
            {"seed", ctx.seed},
            {"tolerance", cfg.sweep.tolerance},
            {"reference",
             {{"fit_quality", ref.fit.quality},
              {"wavenumber", ref.fit.wavenumber},
              {"phase", ref.fit.phase},
              {"transmitted", ref.run.transmitted}}},
            {"geometry",
             {{"nx", cfg.geometry.nx},
              {"ny", cfg.geometry.ny},
              {"barrier_row", cfg.geometry.barrier_row},
              {"slit_separation", cfg.geometry.slit_separation},
              {"solenoid_y", cfg.geometry.solenoid_y},
              {"solenoid_radius", cfg.geometry.solenoid_radius},
              {"screen_row", cfg.geometry.screen_row}}},
            {"points", points},
            {"passed", ok}};
  ctx.report.passed = ok;
  ctx.report.json = body.dump(2);
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"check-invariance", "check-stokes", "separability",
                                                 "codependence",     "ab-sweep",     "gauge-fix",
                                                 "dump",             "load"};
  return names;
}

FieldConfig build_field(const ExperimentConfig& cfg, std::uint64_t seed, std::optional<double> e_flux) {
  const auto& fb = cfg.field;
  FieldConfig c = [&]() -> FieldConfig {
    if (fb.source == "file") return load_field(fb.input);
    const Lattice lat = build_lattice(cfg);
    if (fb.source == "random") return random_config(lat, seed, fb.rho_min);
    if (!cfg.flux) config_error("field.source = solenoid needs [flux]");
    FluxSpec spec = *cfg.flux;
    if (e_flux) spec.total_flux = *e_flux;
    FieldConfig out = solenoid_config(lat, spec, Complex{1.0, 0.0});
    const FieldConfig noise = random_config(out.lattice, seed, fb.rho_min);
    out.psi = noise.psi;
    return out;
  }();
  if (fb.source != "file" && fb.gauge_amplitude != 0.0) {
    c = apply_gauge(c, random_gauge(c.lattice, seed + 1, fb.gauge_amplitude));
  }
  if (!fb.zero.empty()) {
    for (int s : parse_region(fb.zero, c.lattice, cfg.regions).sites()) c.psi[s] = 0.0;
  }
  return c;
}

CommandReport run_command(const std::string& name, const CommandOptions& options) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    config_error("unknown command \"" + name + "\"");
  }
  Context ctx{name,
              options.config_path ? load_config(*options.config_path) : ExperimentConfig{},
              0, "", {}, {}};
  ctx.seed = options.seed.value_or(ctx.cfg.output.seed);
  ctx.format = options.format.value_or(ctx.cfg.output.format);
  if (ctx.format != "json" && ctx.format != "csv" && ctx.format != "binary") {
    config_error("format must be json, csv or binary");
  }
  ctx.out = options.out_dir.value_or(ctx.cfg.output.directory);
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();

  if (name == "check-invariance") cmd_check_invariance(ctx);
  else if (name == "check-stokes") cmd_check_stokes(ctx);
  else if (name == "separability") cmd_separability(ctx);
  else if (name == "codependence") cmd_codependence(ctx);
  else if (name == "ab-sweep") cmd_ab_sweep(ctx);
  else if (name == "gauge-fix") cmd_gauge_fix(ctx);
  else if (name == "dump") cmd_dump(ctx);
  else cmd_load(ctx, options.input);

  ctx.write("report.json", ctx.report.json + "\n");
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const json meta{{"command", name},
                  {"config", options.config_path.value_or("")},
                  {"seed", ctx.seed},
                  {"started_at", started},
                  {"finished_at", utc_now()},
                  {"elapsed_seconds", elapsed},
                  {"passed", ctx.report.passed},
                  {"files", ctx.report.files}};
  write_file_atomic(ctx.out / "metadata.json", meta.dump(2) + "\n");
  return std::move(ctx.report);
}

}  // namespace abfield
