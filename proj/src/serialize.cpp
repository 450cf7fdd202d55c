// SPDX-License-Identifier: Apache-2.0
#include "tamedch/serialize.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "tamedch/errors.hpp"

namespace tamedch {
namespace {

constexpr std::array<char, 4> kFieldMagic{'T', 'C', 'H', 'F'};
constexpr std::uint32_t kFieldVersion = 1;

template <typename T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw IoError("truncated binary field");
  return value;
}

double parse_double(const std::string& s) {
  if (s == "Inf" || s == "inf") return INFINITY;
  if (s == "-Inf" || s == "-inf") return -INFINITY;
  if (s == "NaN" || s == "nan") return NAN;
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ptr == s.data() || (ec != std::errc() && ec != std::errc::result_out_of_range)) {
    throw IoError(fmt::format("not a number: '{}'", s));
  }
  if (ptr != end) throw IoError(fmt::format("trailing characters in number: '{}'", s));
  if (ec == std::errc::result_out_of_range) {
    // Subnormals land here; overflow does not round-trip and is rejected.
    v = std::strtod(s.c_str(), nullptr);
    if (std::isinf(v)) throw IoError(fmt::format("number out of range: '{}'", s));
  }
  return v;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  return fmt::format("{}", x);
}

void write_field_csv(std::ostream& os, const SpectralField& v) {
  os << "dim,N\n" << v.basis().dim() << ',' << v.basis().N() << '\n';
  os << format_double(v.mean()) << '\n';
  for (double c : v.coeffs()) os << format_double(c) << '\n';
}

SpectralField read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "dim,N") throw IoError("missing 'dim,N' header");
  if (!std::getline(is, line)) throw IoError("missing dimension line");
  const auto comma = line.find(',');
  if (comma == std::string::npos) throw IoError("malformed dimension line");
  const BasisSpec basis(std::stoi(line.substr(0, comma)), std::stoi(line.substr(comma + 1)));
  if (!std::getline(is, line)) throw IoError("missing mean");
  const double mean = parse_double(line);
  std::vector<double> coeffs;
  coeffs.reserve(basis.mode_count());
  while (coeffs.size() < basis.mode_count() && std::getline(is, line)) coeffs.push_back(parse_double(line));
  if (coeffs.size() != basis.mode_count()) throw IoError("coefficient count does not match header");
  return SpectralField(basis, mean, std::move(coeffs));
}

void write_field_binary(std::ostream& os, const SpectralField& v) {
  os.write(kFieldMagic.data(), kFieldMagic.size());
  put<std::uint32_t>(os, kFieldVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(v.basis().dim()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(v.basis().N()));
  put<std::uint64_t>(os, v.size());
  put<double>(os, v.mean());
  os.write(reinterpret_cast<const char*>(v.coeffs().data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!os) throw IoError("failed writing binary field");
}

SpectralField read_field_binary(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kFieldMagic) throw IoError("bad field magic");
  if (get<std::uint32_t>(is) != kFieldVersion) throw IoError("unsupported field version");
  const auto dim = get<std::uint32_t>(is);
  const auto N = get<std::uint32_t>(is);
  const BasisSpec basis(static_cast<int>(dim), static_cast<int>(N));
  const auto count = get<std::uint64_t>(is);
  if (count != basis.mode_count()) throw IoError("coefficient count does not match header");
  const double mean = get<double>(is);
  std::vector<double> coeffs(count);
  is.read(reinterpret_cast<char*>(coeffs.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!is) throw IoError("truncated binary field");
  return SpectralField(basis, mean, std::move(coeffs));
}

}  // namespace tamedch
