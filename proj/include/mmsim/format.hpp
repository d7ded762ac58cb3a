#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mmsim {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);
/// Exact hexadecimal representation (e.g. "0x1.8p+1").
std::string format_hex_double(double value);

/// Throws std::invalid_argument when `text` is not entirely a number.
double parse_double(std::string_view text);
double parse_hex_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;
std::string hex64(std::uint64_t value);

}  // namespace mmsim
