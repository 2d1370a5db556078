#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace scenforge {

// Exact arithmetic for the abstract model. All symbolic-model quantities
// (positions, speeds, accelerations, parameters) are rationals so that trace
// validation is reproducible and independent of floating-point rounding.
using Rat = boost::rational<std::int64_t>;

/// Parses a plain decimal literal ("5.6", "-4.6", "0.95", "12") exactly.
Rat rat_from_decimal(std::string_view text);

/// Accepts either "p/q" or a decimal literal.
Rat rat_parse(std::string_view text);

/// Canonical "p/q" rendering, e.g. "28/5", "0/1".
std::string rat_str(const Rat& r);

double rat_to_double(const Rat& r);

std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) noexcept;
std::uint64_t rat_hash(const Rat& r) noexcept;

/// FNV-1a over a byte string, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace scenforge
