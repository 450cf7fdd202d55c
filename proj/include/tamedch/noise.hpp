// SPDX-License-Identifier: Apache-2.0
//
// Q-Wiener noise: covariance spectra, seedable increment paths and their
// coarsening onto nested time grids.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "tamedch/spectral.hpp"

namespace tamedch {

enum class NoiseKind {
  White,            // q_k = 1
  TraceClassLog,    // q_1 = 0, q_i = 1 / (i ln(i)^2)
  SmoothLog,        // q_1 = 0, q_i = 1 / (i^5 ln(i)^2)
  Custom,           // user-supplied q(mode)
  NonCommutingSine  // sum_i sqrt(c_i) beta_i eta_i, eta_i = sqrt(2) sin(i pi x), c_i as TraceClassLog
};

std::string to_string(NoiseKind kind);
/// Accepts "white", "trace_class_log", "smooth_log", "non_commuting_sine", "none".
/// "none" maps to a Custom spectrum that is identically zero.
NoiseKind noise_kind_from_string(const std::string& name);

class NoiseSpec {
 public:
  using CustomSpectrum = std::function<double(ModeIndex)>;

  /// Throws ArgumentError for NonCommutingSine with dim != 1, or Custom without a spectrum.
  NoiseSpec(NoiseKind kind, BasisSpec basis, CustomSpectrum custom = {});

  static NoiseSpec zero(BasisSpec basis);

  NoiseKind kind() const noexcept { return kind_; }
  const BasisSpec& basis() const noexcept { return basis_; }
  const std::string& label() const noexcept { return label_; }

  /// Number of independent Brownian motions driving the path: the cosine
  /// mode count, or N sine modes for NonCommutingSine.
  std::size_t driver_count() const noexcept { return basis_.mode_count(); }

  /// Variance rates of the drivers, in flat order. For the log spectra in d=2
  /// the 1D law is applied to the rank of each mode when sorted by increasing
  /// eigenvalue (ties row-major), counting ranks from 1 like i in d=1.
  const std::vector<double>& driver_variances() const noexcept { return q_; }

  /// Variance rate of the cosine-mode increments (diagonal of the covariance
  /// in the cosine basis).
  std::vector<double> cosine_variances() const;

  /// Row-major (cosine mode x driver) map from driver amplitudes to cosine
  /// coefficients; empty for the diagonal kinds.
  const std::vector<double>& sine_to_cosine() const noexcept { return sine_to_cosine_; }

 private:
  NoiseKind kind_;
  BasisSpec basis_;
  std::string label_;
  std::vector<double> q_;
  std::vector<double> sine_to_cosine_;
};

/// 1D law of the log spectra at (1-based) index i.
double log_spectrum_value(NoiseKind kind, long i);

/// <eta_i, e_k> on (0,1) for sine index i >= 1 and cosine index k >= 0 (k = 0 is the constant).
double sine_cosine_inner(int i, int k);

class NoisePath {
 public:
  NoisePath(NoiseSpec spec, double T, long M_fine, std::uint64_t master_seed, std::uint64_t stream,
            std::vector<double> fine_increments);

  const NoiseSpec& spec() const noexcept { return spec_; }
  double T() const noexcept { return T_; }
  long M_fine() const noexcept { return M_fine_; }
  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::size_t modes() const noexcept { return spec_.basis().mode_count(); }

  /// Cosine-basis increment of fine step m (mean-zero part).
  std::span<const double> fine(long m) const;
  const std::vector<double>& fine_increments() const noexcept { return increments_; }

  /// Sum of fine increments [m * block, (m+1) * block) into out, using the
  /// pairwise reduction shared by every coarsening level.
  void coarse_increment(long M_coarse, long m, std::span<double> out, std::vector<double>& scratch) const;

 private:
  NoiseSpec spec_;
  double T_;
  long M_fine_;
  std::uint64_t master_seed_;
  std::uint64_t stream_;
  std::vector<double> increments_;  // M_fine x modes, row-major
};

/// Fine-level Brownian increments of one sample. stream separates Monte Carlo
/// samples; draws are keyed by (master_seed, stream, step, driver).
NoisePath sample_path(const NoiseSpec& spec, double T, long M_fine, std::uint64_t master_seed,
                      std::uint64_t stream = 0);

/// Coarse increments for M_coarse uniform steps. Throws ArgumentError unless
/// M_coarse divides M_fine. Block sums use an adjacent-pair reduction tree, so
/// when M_fine / M_coarse is a power of two every dyadic coarsening of the
/// same path telescopes bit-exactly.
std::vector<SpectralField> increments_on_grid(const NoisePath& path, long M_coarse);

/// Pairwise (adjacent-pair tree) sum of rows of a row-major block. Shared by
/// the coarsening and by consumers that need totals in the same order.
void pairwise_row_sum(std::span<const double> rows, std::size_t width, std::span<double> out,
                      std::vector<double>& scratch);

struct RegularityDiagnostic {
  std::vector<double> gammas;
  /// partial_sums[g][l] = S(gammas[g], n_l) with n_l = probe_points[l].
  std::vector<std::vector<double>> partial_sums;
  std::vector<long> probe_points;
  std::vector<bool> convergent;
  /// Largest grid gamma judged convergent (0 if none).
  double gamma_admitted = 0.0;
  /// Smallest grid gamma judged divergent (capped at 4 when none is).
  double gamma_boundary = 4.0;
};

/// Partial sums S(gamma, n) = sum_{k <= n} lambda_k^{gamma-2} q_k over gamma in
/// {1/8, 2/8, ..., 4}. A series is judged convergent when its last dyadic tail
/// block S(N_probe) - S(N_probe/2) is smaller than the previous one. Throws
/// ArgumentError for N_probe < 16.
RegularityDiagnostic regularity_exponent(const NoiseSpec& spec, long N_probe);

/// Path cache: "TCHP" magic, u32 version, u32 kind, u32 dim, u32 N, f64 T,
/// u64 M_fine, u64 modes, u64 seed, u64 stream, then M_fine x modes f64 row-major.
void write_path_binary(std::ostream& os, const NoisePath& path);
/// The spec cannot be serialized for Custom spectra; the caller supplies it and
/// the header is checked against it.
NoisePath read_path_binary(std::istream& is, const NoiseSpec& spec);

}  // namespace tamedch
