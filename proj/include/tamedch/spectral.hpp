// SPDX-License-Identifier: Apache-2.0
//
// Neumann Laplacian eigenbasis on the unit interval/square and the diagonal
// operator calculus built on it.
//
// A field is stored as its mean (coefficient of the constant eigenfunction,
// which is 1 on the unit domain) plus coefficients <v, e_k> over the
// mean-zero modes. In d=1 the mode with flat index i is j = i+1 and
// e_j(x) = sqrt(2) cos(j pi x). In d=2 the modes are (k1,k2) with
// 0 <= k_i <= N, excluding (0,0), stored row-major; the eigenfunction is the
// product of 1D factors where a zero index contributes the constant 1.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tamedch {

struct ModeIndex {
  int k1 = 0;
  int k2 = 0;

  friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

class BasisSpec {
 public:
  /// Throws ArgumentError unless dim is 1 or 2 and N >= 1.
  BasisSpec(int dim, int N);

  int dim() const noexcept { return dim_; }
  int N() const noexcept { return N_; }

  /// N (d=1) or (N+1)^2 - 1 (d=2).
  std::size_t mode_count() const noexcept;

  ModeIndex mode(std::size_t flat) const;
  std::size_t flat_index(ModeIndex k) const;
  bool valid(ModeIndex k) const noexcept;

  /// Eigenvalues lambda_k of the Neumann Laplacian in flat order.
  std::vector<double> eigenvalues() const;

  /// Smallest grid size per dimension that evaluates cubic products without
  /// aliasing into retained modes.
  int min_cubic_grid() const noexcept { return 2 * N_ + 1; }
  int default_grid() const noexcept { return 2 * N_ + 2; }

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;

 private:
  int dim_;
  int N_;
};

/// lambda_k = pi^2 |k|^2. Throws IndexError for the mean mode or an index outside the basis.
double eigenvalue(ModeIndex k, const BasisSpec& basis);
/// d=1 shorthand: lambda_j = j^2 pi^2.
double eigenvalue(int j, const BasisSpec& basis);

/// Point value of e_k at x (x[0] only in d=1). Throws IndexError or ArgumentError.
double eigenfunction_eval(ModeIndex k, std::span<const double> x, const BasisSpec& basis);

class SpectralField {
 public:
  explicit SpectralField(BasisSpec basis);
  /// Throws ArgumentError if coeffs.size() != basis.mode_count().
  SpectralField(BasisSpec basis, double mean, std::vector<double> coeffs);

  /// amplitude * e_k.
  static SpectralField mode(BasisSpec basis, ModeIndex k, double amplitude = 1.0);
  static SpectralField constant(BasisSpec basis, double mean);

  const BasisSpec& basis() const noexcept { return basis_; }
  double mean() const noexcept { return mean_; }
  void set_mean(double m) noexcept { mean_ = m; }

  std::span<const double> coeffs() const noexcept { return coeffs_; }
  std::span<double> coeffs() noexcept { return coeffs_; }
  double operator[](std::size_t i) const { return coeffs_[i]; }
  double& operator[](std::size_t i) { return coeffs_[i]; }
  std::size_t size() const noexcept { return coeffs_.size(); }

  /// L2 norm of the whole field, mean included (Parseval).
  double norm() const;
  /// L2 norm of the mean-zero part.
  double mean_zero_norm() const;
  bool all_finite() const;

  friend bool operator==(const SpectralField&, const SpectralField&) = default;

 private:
  BasisSpec basis_;
  double mean_ = 0.0;
  std::vector<double> coeffs_;
};

SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(double s, const SpectralField& a);

/// ||a - b|| including the mean; bases must match.
double distance(const SpectralField& a, const SpectralField& b);

/// E(t) = exp(-t A^2): mode k scaled by exp(-t lambda_k^2), mean unchanged.
SpectralField apply_semigroup(const SpectralField& v, double t);

/// A^{-1}(I - E(tau)) on P_N data: mode k scaled by (1 - exp(-tau lambda_k^2)) / lambda_k.
/// Throws ContractError on nonzero mean.
SpectralField apply_phi(const SpectralField& v, double tau);

/// A^alpha on the mean-zero part. The result has zero mean; negative alpha
/// requires a zero-mean input (ContractError otherwise).
SpectralField apply_A_power(const SpectralField& v, double alpha);

/// P_{N'}: zero every mode with an index component above N'. Mean untouched.
SpectralField project(const SpectralField& v, int N_prime);

/// Re-express v on another basis of the same dimension, truncating or zero-padding.
SpectralField embed(const SpectralField& v, const BasisSpec& target);

/// Point values on the midpoint cosine nodes x_i = (i + 1/2) / n_grid, row-major in d=2.
struct GridBuffer {
  BasisSpec basis;
  int n_grid;
  std::vector<double> values;
};

/// Throws ArgumentError if n_grid < N + 1.
GridBuffer to_grid(const SpectralField& v, int n_grid);
SpectralField to_spectral(const GridBuffer& g, int N);

}  // namespace tamedch
