#include "scenforge/rational.hpp"

#include <cctype>
#include <cstdio>
#include <stdexcept>

namespace scenforge {

namespace {

[[noreturn]] void bad_number(std::string_view text) {
  throw std::invalid_argument("not a number: '" + std::string(text) + "'");
}

}  // namespace

Rat rat_from_decimal(std::string_view text) {
  std::size_t i = 0;
  bool neg = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    neg = text[i] == '-';
    ++i;
  }
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool any_digit = false;
  bool seen_dot = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c == '.') {
      if (seen_dot) bad_number(text);
      seen_dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) bad_number(text);
    if (num > (INT64_MAX - 9) / 10 || den > INT64_MAX / 10) {
      throw std::invalid_argument("decimal literal too long: '" + std::string(text) + "'");
    }
    num = num * 10 + (c - '0');
    if (seen_dot) den *= 10;
    any_digit = true;
  }
  if (!any_digit) bad_number(text);
  return Rat(neg ? -num : num, den);
}

Rat rat_parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return rat_from_decimal(text);
  auto parse_int = [&](std::string_view part) -> std::int64_t {
    if (part.empty()) bad_number(text);
    std::size_t i = 0;
    bool neg = false;
    if (part[i] == '+' || part[i] == '-') {
      neg = part[i] == '-';
      ++i;
    }
    if (i == part.size()) bad_number(text);
    std::int64_t v = 0;
    for (; i < part.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(part[i]))) bad_number(text);
      if (v > (INT64_MAX - 9) / 10) bad_number(text);
      v = v * 10 + (part[i] - '0');
    }
    return neg ? -v : v;
  };
  std::int64_t num = parse_int(text.substr(0, slash));
  std::int64_t den = parse_int(text.substr(slash + 1));
  if (den == 0) throw std::invalid_argument("zero denominator: '" + std::string(text) + "'");
  return Rat(num, den);
}

std::string rat_str(const Rat& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

double rat_to_double(const Rat& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) noexcept {
  // splitmix64 step folded into a running hash
  std::uint64_t z = h + 0x9e3779b97f4a7c15ULL + v;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rat_hash(const Rat& r) noexcept {
  return hash_mix(static_cast<std::uint64_t>(r.numerator()),
                  static_cast<std::uint64_t>(r.denominator()));
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace scenforge
