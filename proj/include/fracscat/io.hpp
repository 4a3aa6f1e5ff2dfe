#pragma once

#include "fracscat/farfield.hpp"
#include "fracscat/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace fracscat {

/// 64-bit FNV-1a digest as 16 lowercase hex digits.
std::string settings_hash(std::string_view canonical);

inline constexpr std::uint32_t potential_format_version = 1;
inline constexpr std::uint32_t farfield_format_version = 1;

/// Binary potential file: magic "FWPOT1", version, d, role, settings hash, h, origin,
/// shape, sample count and the samples, all little-endian.
struct PotentialFile {
    PotentialGrid grid;
    FieldRole role = FieldRole::auxiliary_w;
    std::string settings_hash;
};

void write_potential(const std::filesystem::path& path, const PotentialGrid& grid, FieldRole role,
                     std::string_view hash);
/// Throws FormatError on a bad magic or version, truncation, trailing bytes, or a NaN
/// sample (the message carries its index).
PotentialFile read_potential(const std::filesystem::path& path);

/// Plot-ready CSV: one row per node, columns x0..x{d-1},value. A non-empty hash is
/// written first as a `# settings_hash=` comment line.
void write_potential_csv(const std::filesystem::path& path, const PotentialGrid& grid, std::string_view hash = {});

/// Plot-ready CSV of a complex field: x0..x{d-1},re,im,abs.
void write_field_csv(const std::filesystem::path& path, const ComplexField& field, std::string_view hash = {});

/// Writes text to a file, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

/// "# settings_hash=<hash>\n", or nothing for an empty hash.
std::string hash_comment(std::string_view hash);

/// Far-field CSV (k, xhat, theta, re, im at 17 significant digits) plus a JSON sidecar
/// `<path>.json` holding the metadata and record count.
void write_farfield(const std::filesystem::path& path, const FarFieldSet& ff);
FarFieldSet read_farfield(const std::filesystem::path& path);

/// Kind of dataset at `path`, judged by content: "potential", "farfield" or "unknown".
std::string detect_dataset(const std::filesystem::path& path);

} // namespace fracscat
