#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "abfield/fields.hpp"

namespace abfield {

enum class FileFormat { Json, Binary };

// JSON documents carry "format": "abfield/field-config" or
// "abfield/invariant-state" and "version": 1.
//
// Binary layout (little endian):
//   0   char[8]  magic "ABFLDBIN"
//   8   u32      version (1)
//   12  u32      kind (1 = field config, 2 = invariant state)
//   16  u32 nx, u32 ny, f64 spacing, u8 boundary, 3 bytes zero padding
//   36  u32      excised site count n, then n u32 site indices
//   then field config:   site_count x (f64 re, f64 im), link_count x f64
//        invariant state: site_count x f64 rho, link_count x f64 d
inline constexpr char kBinaryMagic[8] = {'A', 'B', 'F', 'L', 'D', 'B', 'I', 'N'};
inline constexpr std::uint32_t kFormatVersion = 1;

std::string to_json(const FieldConfig& c);
std::string to_json(const InvariantState& s);
std::vector<std::uint8_t> to_binary(const FieldConfig& c);
std::vector<std::uint8_t> to_binary(const InvariantState& s);

using StateDocument = std::variant<FieldConfig, InvariantState>;

// Accepts either format; binary is recognised by its magic. Throws LoadError
// with the byte offset of the first problem.
StateDocument parse_state(std::span<const std::uint8_t> bytes);
FieldConfig parse_field(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
// Writes to a temporary file in the same directory, then renames it.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

void save_state(const std::filesystem::path& path, const StateDocument& doc, FileFormat format);
StateDocument load_state(const std::filesystem::path& path);
FieldConfig load_field(const std::filesystem::path& path);

}  // namespace abfield
