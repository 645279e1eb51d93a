#include "polarset/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace polarset {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s == "inf" || s == "+inf") return kInfinity;
  if (s == "-inf") return -kInfinity;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InputError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return out;
}

void write_measure_csv(std::ostream& os, const DiscreteMeasure& mu) {
  const auto dim = mu.empty() ? 1 : mu.dimension();
  for (Eigen::Index i = 0; i < dim; ++i) os << 'x' << (i + 1) << ',';
  os << "weight\n";
  for (const auto& a : mu.atoms()) {
    for (Eigen::Index i = 0; i < dim; ++i) os << format_double(a.point[i]) << ',';
    os << format_double(a.weight) << '\n';
  }
}

DiscreteMeasure read_measure_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("measure csv: missing header");
  std::size_t columns = 1;
  for (char c : line) columns += c == ',' ? 1 : 0;
  if (columns < 2 || line.rfind("weight") == std::string::npos) throw InputError("measure csv: bad header");
  DiscreteMeasure mu;
  int number = 1;
  while (std::getline(is, line)) {
    ++number;
    if (line.empty() || line == "\r") continue;
    std::vector<double> cells;
    std::string_view rest(line);
    try {
      for (;;) {
        const auto comma = rest.find(',');
        cells.push_back(parse_double(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      if (cells.size() != columns) throw InputError("expected " + std::to_string(columns) + " columns");
      Point p(static_cast<Eigen::Index>(columns - 1));
      for (std::size_t i = 0; i + 1 < columns; ++i) p[static_cast<Eigen::Index>(i)] = cells[i];
      mu.add_atom(p, cells.back());
    } catch (const InputError& e) {
      throw InputError("measure csv line " + std::to_string(number) + ": " + e.what());
    }
  }
  return mu;
}

void write_field_csv(std::ostream& os, std::span<const Point> points, std::span<const double> values) {
  const auto dim = points.empty() ? 1 : points.front().size();
  for (Eigen::Index i = 0; i < dim; ++i) os << 'x' << (i + 1) << ',';
  os << "value\n";
  for (std::size_t j = 0; j < points.size(); ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) os << format_double(points[j][i]) << ',';
    os << format_double(values[j]) << '\n';
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << contents;
}

double check_margin(const Check& c) {
  if (c.value == c.bound) return 0.0;
  if (c.relation == ">=" || c.relation == ">") return c.value - c.bound;
  if (c.relation == "<=" || c.relation == "<") return c.bound - c.value;
  return c.pass ? 0.0 : -std::abs(c.value - c.bound);
}

}  // namespace polarset
