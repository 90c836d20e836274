#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "hk/core.hpp"

namespace hk {

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& token) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw DomainError("profile: not a number: '" + token + "'");
  }
  if (used != token.size()) throw DomainError("profile: not a number: '" + token + "'");
  return v;
}

}  // namespace

OpinionProfile read_profile(std::istream& in) {
  long long n = 0;
  long long d = 0;
  if (!(in >> n >> d)) throw DomainError("profile: missing 'n d' header");
  if (n < 1 || d < 1) throw DomainError("profile: n and d must be >= 1");
  Matrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
  std::string token;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t k = 0; k < m.cols(); ++k) {
      if (!(in >> token)) throw DomainError("profile: expected " + std::to_string(n * d) + " values");
      m(i, k) = parse_number(token);
    }
  if (in >> token) throw DomainError("profile: trailing data after " + std::to_string(n * d) + " values");
  return OpinionProfile(std::move(m));
}

void write_profile(std::ostream& out, const OpinionProfile& profile) {
  out << profile.agents() << ' ' << profile.dimension() << '\n';
  for (std::size_t i = 0; i < profile.agents(); ++i) {
    for (std::size_t k = 0; k < profile.dimension(); ++k) {
      if (k) out << ' ';
      out << format_number(profile(i, k));
    }
    out << '\n';
  }
}

OpinionProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile file: " + path);
  return read_profile(in);
}

void save_profile(const std::string& path, const OpinionProfile& profile) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write profile file: " + path);
  write_profile(out, profile);
  if (!out) throw std::runtime_error("error while writing profile file: " + path);
}

ConfidenceBounds read_bounds(std::istream& in) {
  std::string line;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  std::istringstream fields(line);
  std::vector<double> radii;
  std::string token;
  while (fields >> token) radii.push_back(parse_number(token));
  if (radii.empty()) throw DomainError("bounds: empty line");
  return ConfidenceBounds(std::move(radii));
}

void write_bounds(std::ostream& out, const ConfidenceBounds& bounds) {
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (i) out << ' ';
    out << format_number(bounds[i]);
  }
  out << '\n';
}

ConfidenceBounds load_bounds(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open bounds file: " + path);
  return read_bounds(in);
}

}  // namespace hk
