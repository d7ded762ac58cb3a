#include "mmsim/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace mmsim {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_hex_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::hex);
  std::string text(buf, res.ptr);
  if (!std::isfinite(value)) return text;
  return text.front() == '-' ? "-0x" + text.substr(1) : "0x" + text;
}

namespace {

double parse_double_as(std::string_view text, std::chars_format fmt) {
  if (text == "nan" || text == "-nan") return std::nan("");
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  bool negative = false;
  std::string_view body = text;
  // from_chars with chars_format::hex takes no "0x" prefix.
  if (fmt == std::chars_format::hex) {
    if (!body.empty() && body.front() == '-') {
      negative = true;
      body.remove_prefix(1);
    }
    if (body.size() >= 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
      body.remove_prefix(2);
    }
  }
  double value = 0.0;
  const auto res = std::from_chars(body.data(), body.data() + body.size(), value, fmt);
  if (res.ec != std::errc() || res.ptr != body.data() + body.size() || body.empty()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return negative ? -value : value;
}

}  // namespace

double parse_double(std::string_view text) {
  return parse_double_as(text, std::chars_format::general);
}

double parse_hex_double(std::string_view text) {
  return parse_double_as(text, std::chars_format::hex);
}

std::int64_t parse_int(std::string_view text) {
  std::int64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace mmsim
