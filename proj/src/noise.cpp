// SPDX-License-Identifier: Apache-2.0
#include "tamedch/noise.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "tamedch/errors.hpp"
#include "tamedch/philox.hpp"

namespace tamedch {

using std::numbers::pi;

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::White: return "white";
    case NoiseKind::TraceClassLog: return "trace_class_log";
    case NoiseKind::SmoothLog: return "smooth_log";
    case NoiseKind::Custom: return "custom";
    case NoiseKind::NonCommutingSine: return "non_commuting_sine";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "white") return NoiseKind::White;
  if (name == "trace_class_log") return NoiseKind::TraceClassLog;
  if (name == "smooth_log") return NoiseKind::SmoothLog;
  if (name == "non_commuting_sine") return NoiseKind::NonCommutingSine;
  if (name == "none") return NoiseKind::Custom;
  throw ArgumentError(fmt::format("unknown noise kind '{}'", name));
}

double log_spectrum_value(NoiseKind kind, long i) {
  if (i < 1) throw IndexError("spectrum index starts at 1");
  if (i == 1) return 0.0;
  const double di = static_cast<double>(i);
  const double l = std::log(di);
  switch (kind) {
    case NoiseKind::TraceClassLog:
    case NoiseKind::NonCommutingSine:
      return 1.0 / (di * l * l);
    case NoiseKind::SmoothLog:
      return 1.0 / (di * di * di * di * di * l * l);
    default:
      throw ArgumentError("not a log spectrum");
  }
}

double sine_cosine_inner(int i, int k) {
  if (i < 1 || k < 0) throw IndexError("sine index must be >= 1 and cosine index >= 0");
  if (k == 0) return (i % 2 == 1) ? 2.0 * std::sqrt(2.0) / (i * pi) : 0.0;
  if ((i + k) % 2 == 0) return 0.0;
  const double di = i;
  const double dk = k;
  return 4.0 * di / (pi * (di * di - dk * dk));
}

namespace {

// Rank (1-based) of each flat mode when sorted by eigenvalue, ties row-major.
std::vector<long> eigenvalue_ranks(const BasisSpec& basis) {
  const std::size_t n = basis.mode_count();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto norm2 = [&](std::size_t i) {
    const ModeIndex k = basis.mode(i);
    return static_cast<long>(k.k1) * k.k1 + static_cast<long>(k.k2) * k.k2;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norm2(a) < norm2(b); });
  std::vector<long> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = static_cast<long>(r) + 1;
  return rank;
}

}  // namespace

NoiseSpec::NoiseSpec(NoiseKind kind, BasisSpec basis, CustomSpectrum custom)
    : kind_(kind), basis_(basis), label_(to_string(kind)) {
  const std::size_t n = basis.mode_count();
  q_.assign(n, 0.0);
  switch (kind) {
    case NoiseKind::White:
      std::fill(q_.begin(), q_.end(), 1.0);
      break;
    case NoiseKind::TraceClassLog:
    case NoiseKind::SmoothLog: {
      const auto rank = eigenvalue_ranks(basis);
      for (std::size_t i = 0; i < n; ++i) q_[i] = log_spectrum_value(kind, rank[i]);
      break;
    }
    case NoiseKind::Custom:
      if (!custom) throw ArgumentError("custom noise requires a spectrum");
      for (std::size_t i = 0; i < n; ++i) {
        const double v = custom(basis.mode(i));
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw ArgumentError(fmt::format("custom spectrum value {} at mode {} is not finite and >= 0", v, i));
        }
        q_[i] = v;
      }
      break;
    case NoiseKind::NonCommutingSine: {
      if (basis.dim() != 1) throw ArgumentError("non-commuting sine noise is defined for dim = 1 only");
      const int N = basis.N();
      for (int i = 1; i <= N; ++i) q_[i - 1] = log_spectrum_value(kind, i);
      sine_to_cosine_.assign(static_cast<std::size_t>(N) * N, 0.0);
      for (int k = 1; k <= N; ++k) {
        for (int i = 1; i <= N; ++i) {
          sine_to_cosine_[static_cast<std::size_t>(k - 1) * N + (i - 1)] = sine_cosine_inner(i, k);
        }
      }
      break;
    }
  }
}

NoiseSpec NoiseSpec::zero(BasisSpec basis) {
  NoiseSpec spec(NoiseKind::Custom, basis, [](ModeIndex) { return 0.0; });
  spec.label_ = "none";
  return spec;
}

std::vector<double> NoiseSpec::cosine_variances() const {
  if (sine_to_cosine_.empty()) return q_;
  const std::size_t n = q_.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double s = sine_to_cosine_[k * n + i];
      out[k] += s * s * q_[i];
    }
  }
  return out;
}

NoisePath::NoisePath(NoiseSpec spec, double T, long M_fine, std::uint64_t master_seed, std::uint64_t stream,
                     std::vector<double> fine_increments)
    : spec_(std::move(spec)),
      T_(T),
      M_fine_(M_fine),
      master_seed_(master_seed),
      stream_(stream),
      increments_(std::move(fine_increments)) {
  if (increments_.size() != static_cast<std::size_t>(M_fine_) * modes()) {
    throw ArgumentError("increment array does not match M_fine x modes");
  }
}

std::span<const double> NoisePath::fine(long m) const {
  if (m < 0 || m >= M_fine_) throw IndexError(fmt::format("fine step {} out of range", m));
  return std::span<const double>(increments_).subspan(static_cast<std::size_t>(m) * modes(), modes());
}

void pairwise_row_sum(std::span<const double> rows, std::size_t width, std::span<double> out,
                      std::vector<double>& scratch) {
  const std::size_t count = width == 0 ? 0 : rows.size() / width;
  if (count == 1) {
    std::copy(rows.begin(), rows.end(), out.begin());
    return;
  }
  scratch.assign(rows.begin(), rows.end());
  std::size_t len = count;
  while (len > 1) {
    const std::size_t half = len / 2;
    for (std::size_t r = 0; r < half; ++r) {
      double* dst = scratch.data() + r * width;
      const double* a = scratch.data() + 2 * r * width;
      const double* b = a + width;
      for (std::size_t c = 0; c < width; ++c) dst[c] = a[c] + b[c];
    }
    if (len % 2 == 1) {
      std::copy_n(scratch.data() + (len - 1) * width, width, scratch.data() + half * width);
    }
    len = half + len % 2;
  }
  std::copy_n(scratch.begin(), width, out.begin());
}

void NoisePath::coarse_increment(long M_coarse, long m, std::span<double> out, std::vector<double>& scratch) const {
  const long block = M_fine_ / M_coarse;
  const std::size_t width = modes();
  auto rows = std::span<const double>(increments_)
                  .subspan(static_cast<std::size_t>(m * block) * width, static_cast<std::size_t>(block) * width);
  pairwise_row_sum(rows, width, out, scratch);
}

NoisePath sample_path(const NoiseSpec& spec, double T, long M_fine, std::uint64_t master_seed, std::uint64_t stream) {
  if (M_fine < 1) throw ArgumentError("M_fine must be >= 1");
  if (!(T > 0.0)) throw ArgumentError("T must be > 0");
  const std::size_t drivers = spec.driver_count();
  const std::size_t modes = spec.basis().mode_count();
  const double tau = T / static_cast<double>(M_fine);
  const auto& q = spec.driver_variances();
  std::vector<double> scale(drivers);
  for (std::size_t d = 0; d < drivers; ++d) scale[d] = std::sqrt(q[d] * tau);

  const PhiloxKey key = key_from_seed(master_seed);
  const auto s_lo = static_cast<std::uint32_t>(stream);
  const auto s_hi = static_cast<std::uint32_t>(stream >> 32);
  const auto& mix = spec.sine_to_cosine();
  std::vector<double> increments(static_cast<std::size_t>(M_fine) * modes, 0.0);
  std::vector<double> drive(drivers);
  for (long m = 0; m < M_fine; ++m) {
    for (std::size_t p = 0; 2 * p < drivers; ++p) {
      const PhiloxCounter ctr{static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(p), s_lo, s_hi};
      const auto [z0, z1] = normal_pair(ctr, key);
      drive[2 * p] = scale[2 * p] * z0;
      if (2 * p + 1 < drivers) drive[2 * p + 1] = scale[2 * p + 1] * z1;
    }
    double* row = increments.data() + static_cast<std::size_t>(m) * modes;
    if (mix.empty()) {
      std::copy(drive.begin(), drive.end(), row);
    } else {
      for (std::size_t k = 0; k < modes; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < drivers; ++i) acc += mix[k * drivers + i] * drive[i];
        row[k] = acc;
      }
    }
  }
  return NoisePath(spec, T, M_fine, master_seed, stream, std::move(increments));
}

std::vector<SpectralField> increments_on_grid(const NoisePath& path, long M_coarse) {
  if (M_coarse < 1 || path.M_fine() % M_coarse != 0) {
    throw ArgumentError(fmt::format("M_coarse {} does not divide M_fine {}", M_coarse, path.M_fine()));
  }
  std::vector<SpectralField> out;
  out.reserve(static_cast<std::size_t>(M_coarse));
  std::vector<double> scratch;
  for (long m = 0; m < M_coarse; ++m) {
    SpectralField inc(path.spec().basis());
    path.coarse_increment(M_coarse, m, inc.coeffs(), scratch);
    out.push_back(std::move(inc));
  }
  return out;
}

RegularityDiagnostic regularity_exponent(const NoiseSpec& spec, long N_probe) {
  if (N_probe < 16) throw ArgumentError("N_probe must be >= 16");
  const BasisSpec& basis = spec.basis();

  // Eigenvalue and spectrum value for ranks 1..N_probe.
  std::vector<double> lambda(static_cast<std::size_t>(N_probe));
  std::vector<double> q(static_cast<std::size_t>(N_probe));
  std::vector<ModeIndex> modes(static_cast<std::size_t>(N_probe));
  if (basis.dim() == 1) {
    for (long k = 1; k <= N_probe; ++k) modes[k - 1] = {static_cast<int>(k), 0};
  } else {
    // Every mode with smaller eigenvalue than the N_probe-th lies in the quarter disc.
    auto radius = static_cast<long>(std::ceil(std::sqrt(4.0 * N_probe / pi))) + 2;
    std::vector<ModeIndex> all;
    while (true) {
      all.clear();
      for (long a = 0; a <= radius; ++a) {
        for (long b = 0; b <= radius; ++b) {
          if ((a != 0 || b != 0) && a * a + b * b <= radius * radius) {
            all.push_back({static_cast<int>(a), static_cast<int>(b)});
          }
        }
      }
      if (all.size() >= static_cast<std::size_t>(N_probe)) break;
      radius += 2;
    }
    std::stable_sort(all.begin(), all.end(), [](ModeIndex x, ModeIndex y) {
      return x.k1 * x.k1 + x.k2 * x.k2 < y.k1 * y.k1 + y.k2 * y.k2;
    });
    std::copy_n(all.begin(), N_probe, modes.begin());
  }
  // Custom spectra are only known on the basis; probe them there and treat the rest as zero.
  const BasisSpec probe_basis(basis.dim(), std::max(basis.N(), 1));
  for (long r = 0; r < N_probe; ++r) {
    const ModeIndex k = modes[r];
    lambda[r] = pi * pi * (static_cast<double>(k.k1) * k.k1 + static_cast<double>(k.k2) * k.k2);
    switch (spec.kind()) {
      case NoiseKind::White: q[r] = 1.0; break;
      case NoiseKind::Custom:
        q[r] = probe_basis.valid(k) ? spec.driver_variances()[probe_basis.flat_index(k)] : 0.0;
        break;
      default: q[r] = log_spectrum_value(spec.kind(), r + 1); break;
    }
  }

  RegularityDiagnostic diag;
  diag.probe_points = {N_probe / 4, N_probe / 2, N_probe};
  for (int g = 1; g <= 32; ++g) diag.gammas.push_back(g / 8.0);
  std::vector<double> log_lambda(lambda.size());
  for (std::size_t r = 0; r < lambda.size(); ++r) log_lambda[r] = std::log(lambda[r]);
  bool boundary_found = false;
  for (double gamma : diag.gammas) {
    std::array<long double, 3> block{};  // (0, n/4], (n/4, n/2], (n/2, n]
    for (long r = 0; r < N_probe; ++r) {
      const long double term = std::exp((gamma - 2.0) * log_lambda[r]) * q[r];
      const long k = r + 1;
      block[k <= diag.probe_points[0] ? 0 : (k <= diag.probe_points[1] ? 1 : 2)] += term;
    }
    diag.partial_sums.push_back({static_cast<double>(block[0]), static_cast<double>(block[0] + block[1]),
                                 static_cast<double>(block[0] + block[1] + block[2])});
    const bool conv = block[2] < block[1] || block[2] == 0.0L;
    diag.convergent.push_back(conv);
    if (conv && !boundary_found) diag.gamma_admitted = gamma;
    if (!conv && !boundary_found) {
      diag.gamma_boundary = gamma;
      boundary_found = true;
    }
  }
  return diag;
}

namespace {

constexpr std::array<char, 4> kPathMagic{'T', 'C', 'H', 'P'};
constexpr std::uint32_t kPathVersion = 1;

template <typename T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw IoError("truncated path file");
  return value;
}

}  // namespace

void write_path_binary(std::ostream& os, const NoisePath& path) {
  os.write(kPathMagic.data(), kPathMagic.size());
  put<std::uint32_t>(os, kPathVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(path.spec().kind()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(path.spec().basis().dim()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(path.spec().basis().N()));
  put<double>(os, path.T());
  put<std::uint64_t>(os, static_cast<std::uint64_t>(path.M_fine()));
  put<std::uint64_t>(os, path.modes());
  put<std::uint64_t>(os, path.master_seed());
  put<std::uint64_t>(os, path.stream());
  const auto& data = path.fine_increments();
  os.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!os) throw IoError("failed writing path");
}

NoisePath read_path_binary(std::istream& is, const NoiseSpec& spec) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kPathMagic) throw IoError("bad path magic");
  if (get<std::uint32_t>(is) != kPathVersion) throw IoError("unsupported path version");
  const auto kind = get<std::uint32_t>(is);
  const auto dim = get<std::uint32_t>(is);
  const auto N = get<std::uint32_t>(is);
  if (kind != static_cast<std::uint32_t>(spec.kind()) || dim != static_cast<std::uint32_t>(spec.basis().dim()) ||
      N != static_cast<std::uint32_t>(spec.basis().N())) {
    throw IoError("path header does not match the noise spec");
  }
  const double T = get<double>(is);
  const auto M_fine = get<std::uint64_t>(is);
  const auto modes = get<std::uint64_t>(is);
  const auto seed = get<std::uint64_t>(is);
  const auto stream = get<std::uint64_t>(is);
  if (modes != spec.basis().mode_count()) throw IoError("path mode count does not match the noise spec");
  std::vector<double> data(M_fine * modes);
  is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!is) throw IoError("truncated path data");
  return NoisePath(spec, T, static_cast<long>(M_fine), seed, stream, std::move(data));
}

}  // namespace tamedch
