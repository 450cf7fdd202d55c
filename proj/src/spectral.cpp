// SPDX-License-Identifier: Apache-2.0
#include "tamedch/spectral.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "tamedch/errors.hpp"
#include "tamedch/transform.hpp"

namespace tamedch {

using std::numbers::pi;

BasisSpec::BasisSpec(int dim, int N) : dim_(dim), N_(N) {
  if (dim != 1 && dim != 2) throw ArgumentError(fmt::format("dim must be 1 or 2, got {}", dim));
  if (N < 1) throw ArgumentError(fmt::format("N must be >= 1, got {}", N));
}

std::size_t BasisSpec::mode_count() const noexcept {
  if (dim_ == 1) return static_cast<std::size_t>(N_);
  const auto side = static_cast<std::size_t>(N_) + 1;
  return side * side - 1;
}

bool BasisSpec::valid(ModeIndex k) const noexcept {
  if (k.k1 < 0 || k.k2 < 0 || k.k1 > N_ || k.k2 > N_) return false;
  if (dim_ == 1) return k.k1 >= 1 && k.k2 == 0;
  return k.k1 != 0 || k.k2 != 0;
}

ModeIndex BasisSpec::mode(std::size_t flat) const {
  if (flat >= mode_count()) throw IndexError(fmt::format("flat mode index {} out of range", flat));
  if (dim_ == 1) return {static_cast<int>(flat) + 1, 0};
  const auto side = static_cast<std::size_t>(N_) + 1;
  const std::size_t shifted = flat + 1;
  return {static_cast<int>(shifted / side), static_cast<int>(shifted % side)};
}

std::size_t BasisSpec::flat_index(ModeIndex k) const {
  if (!valid(k)) throw IndexError(fmt::format("mode ({},{}) not in basis", k.k1, k.k2));
  if (dim_ == 1) return static_cast<std::size_t>(k.k1 - 1);
  return static_cast<std::size_t>(k.k1) * (N_ + 1) + k.k2 - 1;
}

std::vector<double> BasisSpec::eigenvalues() const {
  std::vector<double> out(mode_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const ModeIndex k = mode(i);
    out[i] = pi * pi * (static_cast<double>(k.k1) * k.k1 + static_cast<double>(k.k2) * k.k2);
  }
  return out;
}

double eigenvalue(ModeIndex k, const BasisSpec& basis) {
  if (!basis.valid(k)) throw IndexError(fmt::format("mode ({},{}) not in basis", k.k1, k.k2));
  return pi * pi * (static_cast<double>(k.k1) * k.k1 + static_cast<double>(k.k2) * k.k2);
}

double eigenvalue(int j, const BasisSpec& basis) {
  if (basis.dim() != 1) throw IndexError("scalar mode index requires dim = 1");
  return eigenvalue(ModeIndex{j, 0}, basis);
}

double eigenfunction_eval(ModeIndex k, std::span<const double> x, const BasisSpec& basis) {
  if (!basis.valid(k)) throw IndexError(fmt::format("mode ({},{}) not in basis", k.k1, k.k2));
  if (x.size() < static_cast<std::size_t>(basis.dim())) throw ArgumentError("point has too few coordinates");
  auto factor = [](int j, double xi) {
    if (xi < 0.0 || xi > 1.0) throw ArgumentError(fmt::format("point {} outside [0,1]", xi));
    return j == 0 ? 1.0 : std::sqrt(2.0) * std::cos(j * pi * xi);
  };
  if (basis.dim() == 1) return factor(k.k1, x[0]);
  return factor(k.k1, x[0]) * factor(k.k2, x[1]);
}

SpectralField::SpectralField(BasisSpec basis) : basis_(basis), coeffs_(basis.mode_count(), 0.0) {}

SpectralField::SpectralField(BasisSpec basis, double mean, std::vector<double> coeffs)
    : basis_(basis), mean_(mean), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != basis_.mode_count()) {
    throw ArgumentError(fmt::format("coefficient count {} != mode count {}", coeffs_.size(),
                                    basis_.mode_count()));
  }
}

SpectralField SpectralField::mode(BasisSpec basis, ModeIndex k, double amplitude) {
  SpectralField f(basis);
  f.coeffs_[basis.flat_index(k)] = amplitude;
  return f;
}

SpectralField SpectralField::constant(BasisSpec basis, double mean) {
  SpectralField f(basis);
  f.mean_ = mean;
  return f;
}

double SpectralField::norm() const {
  double s = mean_ * mean_;
  for (double c : coeffs_) s += c * c;
  return std::sqrt(s);
}

double SpectralField::mean_zero_norm() const {
  double s = 0.0;
  for (double c : coeffs_) s += c * c;
  return std::sqrt(s);
}

bool SpectralField::all_finite() const {
  if (!std::isfinite(mean_)) return false;
  for (double c : coeffs_) {
    if (!std::isfinite(c)) return false;
  }
  return true;
}

namespace {

void require_same_basis(const SpectralField& a, const SpectralField& b) {
  if (!(a.basis() == b.basis())) throw ArgumentError("fields live on different bases");
}

}  // namespace

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  require_same_basis(a, b);
  SpectralField out = a;
  out.set_mean(a.mean() + b.mean());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  require_same_basis(a, b);
  SpectralField out = a;
  out.set_mean(a.mean() - b.mean());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

SpectralField operator*(double s, const SpectralField& a) {
  SpectralField out = a;
  out.set_mean(s * a.mean());
  for (double& c : out.coeffs()) c *= s;
  return out;
}

double distance(const SpectralField& a, const SpectralField& b) {
  require_same_basis(a, b);
  const double dm = a.mean() - b.mean();
  double s = dm * dm;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

SpectralField apply_semigroup(const SpectralField& v, double t) {
  if (!(t >= 0.0)) throw ArgumentError(fmt::format("semigroup time must be >= 0, got {}", t));
  SpectralField out = v;
  if (t == 0.0) return out;
  const auto lambda = v.basis().eigenvalues();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= std::exp(-t * lambda[i] * lambda[i]);
  return out;
}

SpectralField apply_phi(const SpectralField& v, double tau) {
  if (!(tau > 0.0)) throw ArgumentError(fmt::format("step size must be > 0, got {}", tau));
  if (v.mean() != 0.0) throw ContractError("apply_phi requires zero-mean (projected) input");
  SpectralField out = v;
  const auto lambda = v.basis().eigenvalues();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] *= -std::expm1(-tau * lambda[i] * lambda[i]) / lambda[i];
  }
  return out;
}

SpectralField apply_A_power(const SpectralField& v, double alpha) {
  if (alpha < 0.0 && v.mean() != 0.0) throw ContractError("negative powers of A require zero-mean input");
  SpectralField out = v;
  out.set_mean(0.0);
  const auto lambda = v.basis().eigenvalues();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= std::pow(lambda[i], alpha);
  return out;
}

SpectralField project(const SpectralField& v, int N_prime) {
  if (N_prime > v.basis().N()) {
    throw ArgumentError(fmt::format("projection level {} exceeds basis N {}", N_prime, v.basis().N()));
  }
  if (N_prime < 0) throw ArgumentError("projection level must be >= 0");
  SpectralField out = v;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const ModeIndex k = v.basis().mode(i);
    if (k.k1 > N_prime || k.k2 > N_prime) out[i] = 0.0;
  }
  return out;
}

SpectralField embed(const SpectralField& v, const BasisSpec& target) {
  if (target.dim() != v.basis().dim()) throw ArgumentError("embed requires matching dimension");
  SpectralField out(target);
  out.set_mean(v.mean());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const ModeIndex k = v.basis().mode(i);
    if (target.valid(k)) out[target.flat_index(k)] = v[i];
  }
  return out;
}

GridBuffer to_grid(const SpectralField& v, int n_grid) {
  CosineTransform transform(v.basis(), n_grid);
  GridBuffer g{v.basis(), n_grid, std::vector<double>(transform.grid_size())};
  transform.synthesize(v.mean(), v.coeffs(), g.values);
  return g;
}

SpectralField to_spectral(const GridBuffer& g, int N) {
  if (N > g.n_grid - 1) throw ArgumentError(fmt::format("n_grid {} too small for N = {}", g.n_grid, N));
  const BasisSpec target(g.basis.dim(), N);
  CosineTransform transform(target, g.n_grid);
  if (g.values.size() != transform.grid_size()) throw ArgumentError("grid buffer size mismatch");
  SpectralField out(target);
  double mean = 0.0;
  transform.analyze(g.values, mean, out.coeffs());
  out.set_mean(mean);
  return out;
}

}  // namespace tamedch
