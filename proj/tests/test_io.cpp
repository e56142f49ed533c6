#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <numbers>

#include "abfield/error.hpp"
#include "abfield/holonomy.hpp"
#include "abfield/io.hpp"

using namespace abfield;
namespace fs = std::filesystem;

namespace {

FieldConfig sample_field(std::uint64_t seed) {
  const Lattice base = Lattice::build(9, 7, 0.5, Boundary::Open);
  FieldConfig c = solenoid_config(base, {4.0, 3.0, 1.2, 1.7}, Complex{1.0, 0.0});
  const FieldConfig noise = random_config(c.lattice, seed, 0.1);
  c.psi = noise.psi;
  return c;
}

void expect_identical(const FieldConfig& a, const FieldConfig& b) {
  ASSERT_TRUE(a.lattice == b.lattice);
  ASSERT_EQ(a.psi.size(), b.psi.size());
  ASSERT_EQ(a.links.size(), b.links.size());
  for (std::size_t s = 0; s < a.psi.size(); ++s) {
    EXPECT_EQ(std::memcmp(&a.psi[s], &b.psi[s], sizeof(Complex)), 0) << "site " << s;
  }
  for (std::size_t l = 0; l < a.links.size(); ++l) {
    EXPECT_EQ(std::memcmp(&a.links[l], &b.links[l], sizeof(double)), 0) << "link " << l;
  }
}

std::size_t load_error_offset(std::span<const std::uint8_t> bytes) {
  try {
    parse_state(bytes);
  } catch (const LoadError& e) {
    EXPECT_EQ(e.code(), ErrorCode::LoadError);
    return e.offset();
  }
  ADD_FAILURE() << "no load error";
  return 0;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("abfield_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Io, BinaryRoundTripIsBitIdentical) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto c = sample_field(seed);
    expect_identical(c, parse_field(to_binary(c)));
  }
}

TEST(Io, JsonRoundTripIsBitIdentical) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto c = sample_field(seed);
    const std::string text = to_json(c);
    const std::vector<std::uint8_t> bytes(text.begin(), text.end());
    expect_identical(c, parse_field(bytes));
  }
}

TEST(Io, JsonBinaryJsonIsValueIdentical) {
  const auto c = sample_field(11);
  const std::string first = to_json(c);
  const auto from_json = parse_field(std::vector<std::uint8_t>(first.begin(), first.end()));
  const auto from_binary = parse_field(to_binary(from_json));
  EXPECT_EQ(to_json(from_binary), first);
}

TEST(Io, InvariantStateRoundTrip) {
  const auto inv = extract_invariants(sample_field(3));
  const auto doc = parse_state(to_binary(inv));
  ASSERT_TRUE(std::holds_alternative<InvariantState>(doc));
  const auto& back = std::get<InvariantState>(doc);
  EXPECT_EQ(back.rho, inv.rho);
  EXPECT_EQ(back.d, inv.d);
  const std::string text = to_json(inv);
  const auto doc2 = parse_state(std::vector<std::uint8_t>(text.begin(), text.end()));
  EXPECT_EQ(std::get<InvariantState>(doc2).d, inv.d);
}

TEST(Io, BinaryHeader) {
  const auto bytes = to_binary(sample_field(1));
  ASSERT_GE(bytes.size(), 12u);
  EXPECT_EQ(std::memcmp(bytes.data(), kBinaryMagic, 8), 0);
  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + 8, 4);
  EXPECT_EQ(version, kFormatVersion);
}

TEST(Io, BadMagicReportsOffsetZero) {
  auto bytes = to_binary(sample_field(1));
  bytes[0] = 'X';
  EXPECT_EQ(load_error_offset(bytes), 0u);
}

TEST(Io, VersionMismatchReportsOffsetEight) {
  auto bytes = to_binary(sample_field(1));
  bytes[8] = 7;
  EXPECT_EQ(load_error_offset(bytes), 8u);
}

TEST(Io, TruncationReportsStartOfCutValue) {
  const auto bytes = to_binary(sample_field(1));
  for (std::size_t n : {std::size_t{4}, std::size_t{20}, std::size_t{40}, bytes.size() - 1}) {
    const std::span<const std::uint8_t> cut(bytes.data(), n);
    const std::size_t offset = load_error_offset(cut);
    EXPECT_LE(offset, n) << "cut at " << n;
    EXPECT_LT(n, offset + 8) << "cut at " << n;
  }
}

TEST(Io, TrailingBytesRejected) {
  auto bytes = to_binary(sample_field(1));
  const std::size_t n = bytes.size();
  bytes.push_back(0);
  EXPECT_EQ(load_error_offset(bytes), n);
}

TEST(Io, MalformedJsonRejected) {
  const std::string text = "{\"format\": \"abfield/field-config\", \"version\": ";
  EXPECT_THROW(parse_state(std::vector<std::uint8_t>(text.begin(), text.end())), LoadError);
  const std::string wrong = "{\"format\": \"abfield/field-config\", \"version\": 2}";
  EXPECT_THROW(parse_state(std::vector<std::uint8_t>(wrong.begin(), wrong.end())), LoadError);
}

TEST(Io, NonzeroPsiOnExcisedSiteRejected) {
  auto c = sample_field(1);
  const int s = c.lattice.site(4, 3);
  ASSERT_FALSE(c.lattice.active(s));
  c.psi[s] = {1.0, 0.0};
  EXPECT_THROW(parse_field(to_binary(c)), LoadError);
}

TEST(Io, AtomicWriteLeavesNoTemporaries) {
  const fs::path dir = scratch_dir("atomic");
  const auto c = sample_field(2);
  save_state(dir / "a.bin", c, FileFormat::Binary);
  save_state(dir / "a.bin", c, FileFormat::Binary);
  save_state(dir / "a.json", c, FileFormat::Json);
  int count = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    ++count;
    EXPECT_NE(entry.path().filename().string().front(), '.');
  }
  EXPECT_EQ(count, 2);
  expect_identical(load_field(dir / "a.bin"), load_field(dir / "a.json"));
  fs::remove_all(dir);
}

TEST(Io, MissingFileIsIoError) {
  try {
    load_state("/nonexistent/abfield/file.bin");
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}
