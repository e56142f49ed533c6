#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "abfield/commands.hpp"
#include "abfield/error.hpp"
#include "abfield/io.hpp"

using namespace abfield;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name)
      : dir(fs::temp_directory_path() / ("abfield_cmd_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }

  std::string config(const std::string& text) const {
    const fs::path p = dir / "config.ini";
    std::ofstream(p) << text;
    return p.string();
  }
  CommandOptions options(const std::string& config_text, const std::string& out = "out") const {
    CommandOptions o;
    o.config_path = config(config_text);
    o.out_dir = (dir / out).string();
    return o;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string annulus(const std::string& field_extra = "", const std::string& sep_extra = "") {
  return R"(
[lattice]
nx = 12
ny = 12
[flux]
center_x = 5.5
center_y = 5.5
radius = 2.2
e_flux = 1.3
[regions]
X = rect(0,0,5,11)
Y = rect(4,0,11,11)
bottom = rect(4,0,5,3)
[field]
source = solenoid
rho_min = 0.2
gauge_amplitude = pi
)" + field_extra + R"(
[separability]
x = X
y = Y
)" + sep_extra + R"(
[output]
seed = 7
)";
}

}  // namespace

TEST(Commands, CheckInvarianceSmallRun) {
  Scratch s("inv");
  const auto r = run_command("check-invariance",
                             s.options("[lattice]\nnx = 8\nny = 8\n[check]\nconfigs = 5\n"));
  EXPECT_TRUE(r.passed);
  const auto j = json::parse(r.json);
  EXPECT_EQ(j["passed"], 5);
  EXPECT_EQ(j["failed"], 0);
  EXPECT_LT(j["worst_residual"].get<double>(), 1e-10);
  EXPECT_TRUE(fs::exists(s.dir / "out" / "report.json"));
  EXPECT_TRUE(fs::exists(s.dir / "out" / "metadata.json"));
}

TEST(Commands, ZeroConfigsIsVacuousPass) {
  Scratch s("zero");
  const auto r = run_command("check-invariance", s.options("[check]\nconfigs = 0\n"));
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(json::parse(r.json)["passed"], 0);
}

TEST(Commands, ReportIsDeterministic) {
  Scratch s("det");
  const std::string cfg = "[lattice]\nnx = 10\nny = 9\n[check]\nconfigs = 4\nloops = 50\n";
  for (const char* name : {"check-invariance", "check-stokes", "dump"}) {
    run_command(name, s.options(cfg, "a"));
    run_command(name, s.options(cfg, "b"));
    EXPECT_EQ(slurp(s.dir / "a" / "report.json"), slurp(s.dir / "b" / "report.json")) << name;
    EXPECT_NE(slurp(s.dir / "a" / "report.json").find("\"seed\""), std::string::npos);
  }
  EXPECT_EQ(slurp(s.dir / "a" / "field.json"), slurp(s.dir / "b" / "field.json"));
}

TEST(Commands, SeedOverridesConfig) {
  Scratch s("seed");
  auto o = s.options("[lattice]\nnx = 6\nny = 6\n", "a");
  run_command("dump", o);
  o.out_dir = (s.dir / "b").string();
  o.seed = 99;
  run_command("dump", o);
  EXPECT_NE(slurp(s.dir / "a" / "field.json"), slurp(s.dir / "b" / "field.json"));
}

TEST(Commands, SeparableCoverReportsNoWitness) {
  Scratch s("sep0");
  const auto r = run_command("separability", s.options(annulus()));
  const auto j = json::parse(r.json);
  EXPECT_FALSE(j["nonseparable"].get<bool>());
  EXPECT_EQ(j["overlap_components"].size(), 2u);
  EXPECT_TRUE(r.passed);
}

TEST(Commands, ZeroedStripGivesWitnessFiles) {
  Scratch s("sep1");
  const auto r = run_command("separability", s.options(annulus("zero = bottom", "delta = 0.7")));
  const auto j = json::parse(r.json);
  EXPECT_TRUE(j["nonseparable"].get<bool>());
  EXPECT_TRUE(r.passed);
  const auto& w = j["witness"];
  EXPECT_TRUE(w["restriction_x_equivalent"].get<bool>());
  EXPECT_TRUE(w["restriction_y_equivalent"].get<bool>());
  EXPECT_FALSE(w["whole_equivalent"].get<bool>());
  EXPECT_LT(w["holonomy_error"].get<double>(), 1e-10);
  EXPECT_TRUE(fs::exists(s.dir / "out" / "original.json"));
  EXPECT_TRUE(fs::exists(s.dir / "out" / "witness.json"));
  const auto original = load_field(s.dir / "out" / "original.json");
  const auto witness = load_field(s.dir / "out" / "witness.json");
  EXPECT_FALSE(gauge_equivalent_general(original, witness).has_value());
}

TEST(Commands, MissingRegionIsConfigError) {
  Scratch s("sep2");
  try {
    run_command("separability", s.options("[separability]\nx = A\ny = B\n"));
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(Commands, CodependenceTracksFlux) {
  Scratch s("cod");
  const auto r = run_command("codependence", s.options(R"(
[lattice]
nx = 12
ny = 12
[flux]
center_x = 5.5
center_y = 5.5
radius = 2.2
[regions]
X = rect(0,0,5,11)
Y = rect(4,0,11,11)
[field]
source = solenoid
[codependence]
x = X
y = Y
alpha = 4, 1
beta = 5, 10
e_flux = 0.5, 1.3, 3.0
)"));
  EXPECT_TRUE(r.passed);
  for (const auto& p : json::parse(r.json)["points"]) {
    EXPECT_LE(p["residual_vs_flux"].get<double>(), 1e-10);
  }
}

TEST(Commands, GaugeFixWritesEquivalentField) {
  Scratch s("fix");
  for (const char* gauge : {"coulomb", "unitary"}) {
    const auto r = run_command(
        "gauge-fix", s.options(std::string("[lattice]\nnx = 10\nny = 10\n[field]\n"
                                           "gauge_amplitude = 2\n[gauge_fix]\ngauge = ") +
                               gauge + "\n"));
    EXPECT_TRUE(r.passed) << gauge;
    EXPECT_TRUE(fs::exists(s.dir / "out" / "fixed.json"));
  }
}

TEST(Commands, DumpLoadRoundTripAcrossFormats) {
  Scratch s("dl");
  auto o = s.options("[lattice]\nnx = 7\nny = 5\n", "dump");
  o.format = "binary";
  run_command("dump", o);
  const fs::path bin = s.dir / "dump" / "field.bin";
  ASSERT_TRUE(fs::exists(bin));

  CommandOptions l;
  l.input = bin.string();
  l.out_dir = (s.dir / "json").string();
  l.format = "json";
  run_command("load", l);
  l.input = (s.dir / "json" / "loaded.json").string();
  l.out_dir = (s.dir / "bin").string();
  l.format = "binary";
  run_command("load", l);
  EXPECT_EQ(slurp(bin), slurp(s.dir / "bin" / "loaded.bin"));
}

TEST(Commands, LoadTruncatedFileFails) {
  Scratch s("trunc");
  auto o = s.options("[lattice]\nnx = 7\nny = 5\n", "dump");
  o.format = "binary";
  run_command("dump", o);
  const std::string bytes = slurp(s.dir / "dump" / "field.bin");
  std::ofstream(s.dir / "cut.bin", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  CommandOptions l;
  l.input = (s.dir / "cut.bin").string();
  l.out_dir = (s.dir / "x").string();
  EXPECT_THROW(run_command("load", l), LoadError);
}

TEST(Commands, UnknownCommandAndMissingDynamics) {
  Scratch s("misc");
  EXPECT_THROW(run_command("frobnicate", {}), Error);
  try {
    run_command("ab-sweep", s.options("[sweep]\ne_flux = 0\n"));
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}
