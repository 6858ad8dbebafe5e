#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace deeppos {

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

// Strict full-token parse; returns false on trailing garbage or overflow.
bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, long long& out);

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary and renames over the target, so readers
// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// SplitMix64 finalizer; used to derive independent per-stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace deeppos
