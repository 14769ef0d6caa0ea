#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spsc {

// Shortest round-trip decimal form; locale-free and stable across runs,
// which the golden-file and determinism tests rely on.
std::string fmt_double(double v);

inline std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<std::uint64_t> parse_u64(std::string_view s);
std::optional<long long> parse_i64(std::string_view s);

std::string read_file(const std::filesystem::path& path);

// Writes via a temp file in the same directory, then renames into place.
void atomic_write(const std::filesystem::path& path, std::string_view content);

}  // namespace spsc
