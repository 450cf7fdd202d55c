// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "tamedch/spectral.hpp"

namespace tamedch {

/// Cosine collocation transform between spectral coefficients of a basis and
/// point values on the midpoint grid x_i = (i + 1/2) / n. Synthesis is a
/// DCT-III and analysis a DCT-II, scaled so that analysis inverts synthesis
/// exactly for every mode below n.
///
/// Instances own their scratch space and must not be shared between threads;
/// the underlying FFTW plans are shared and created once per (dim, n).
class CosineTransform {
 public:
  /// Throws ArgumentError if n_grid < basis.N() + 1.
  CosineTransform(BasisSpec basis, int n_grid);

  const BasisSpec& basis() const noexcept { return basis_; }
  int n_grid() const noexcept { return n_; }
  std::size_t grid_size() const noexcept { return grid_.size(); }

  /// grid <- sum over modes; grid.size() must equal grid_size().
  void synthesize(double mean, std::span<const double> coeffs, std::span<double> grid);
  /// Quadrature coefficients of the grid function for every retained mode.
  void analyze(std::span<const double> grid, double& mean, std::span<double> coeffs);

 private:
  BasisSpec basis_;
  int n_;
  std::vector<double> grid_;
  std::vector<double> spec_;
  std::vector<double> synth_scale_;  // per 1D index k <= N
  std::vector<double> anal_scale_;
  void* plan_dct3_;
  void* plan_dct2_;
};

}  // namespace tamedch
