#pragma once

#include "polarset/measures.hpp"
#include "polarset/report.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace polarset {

/// Shortest round-trip decimal; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double v);

/// Inverse of format_double (also accepts any strtod number). Throws InputError.
double parse_double(std::string_view s);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// CSV `x1,...,xN,weight`.
void write_measure_csv(std::ostream& os, const DiscreteMeasure& mu);
/// Reads the format above; a header row is required. Throws InputError with the line number.
DiscreteMeasure read_measure_csv(std::istream& is);

/// CSV `x1,...,xN,value`.
void write_field_csv(std::ostream& os, std::span<const Point> points, std::span<const double> values);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// Smallest value - bound (or bound - value) by which a check holds; negative when it fails.
double check_margin(const Check& c);

}  // namespace polarset
