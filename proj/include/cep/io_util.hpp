#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cep {

// Shortest round-trip decimal representation. Every float written to a
// report, CSV, or manifest goes through this single rounding contract so
// repeated runs produce byte-identical files.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Splits one CSV record. Handles double-quoted fields with embedded commas
// and doubled quotes; no multi-line fields (none of our formats need them).
std::vector<std::string> split_csv_line(std::string_view line);

std::string csv_escape(std::string_view field);

std::string_view trim(std::string_view s);

// FNV-1a over file bytes; used for stage manifests.
std::uint64_t fnv1a_file(const std::string& path);
std::uint64_t fnv1a_bytes(std::string_view bytes);

}  // namespace cep
