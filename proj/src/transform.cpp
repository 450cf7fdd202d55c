// SPDX-License-Identifier: Apache-2.0
#include "tamedch/transform.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <fmt/format.h>

#include "tamedch/errors.hpp"

namespace tamedch {
namespace {

// FFTW planning is not thread-safe; execution on new arrays is. Plans are
// created with FFTW_ESTIMATE so the algorithm choice (and hence every bit of
// output) does not depend on timing measurements, and with FFTW_UNALIGNED so
// arrays of any alignment run the same codelets.
struct PlanCache {
  std::mutex mutex;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;

  fftw_plan get(int dim, int n, fftw_r2r_kind kind) {
    std::lock_guard lock(mutex);
    auto key = std::make_tuple(dim, n, static_cast<int>(kind));
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    std::size_t total = dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
    std::vector<double> in(total), out(total);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = dim == 1 ? fftw_plan_r2r_1d(n, in.data(), out.data(), kind, flags)
                           : fftw_plan_r2r_2d(n, n, in.data(), out.data(), kind, kind, flags);
    if (p == nullptr) throw std::runtime_error("fftw plan creation failed");
    plans.emplace(key, p);
    return p;
  }
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

CosineTransform::CosineTransform(BasisSpec basis, int n_grid) : basis_(basis), n_(n_grid) {
  if (n_grid < basis.N() + 1) {
    throw ArgumentError(fmt::format("n_grid {} < N + 1 = {}", n_grid, basis.N() + 1));
  }
  const std::size_t total = basis.dim() == 1 ? static_cast<std::size_t>(n_)
                                             : static_cast<std::size_t>(n_) * n_;
  grid_.assign(total, 0.0);
  spec_.assign(total, 0.0);
  // REDFT01 computes x_0 + 2 sum_k x_k cos(pi k (i+1/2)/n); e_k carries sqrt(2).
  // REDFT10 computes 2 sum_i y_i cos(pi k (i+1/2)/n); <u, e_k> ~ (sqrt(2)/n) sum_i u_i cos(...).
  synth_scale_.resize(basis.N() + 1);
  anal_scale_.resize(basis.N() + 1);
  for (int k = 0; k <= basis.N(); ++k) {
    synth_scale_[k] = k == 0 ? 1.0 : 1.0 / std::sqrt(2.0);
    anal_scale_[k] = (k == 0 ? 1.0 : std::sqrt(2.0)) / (2.0 * n_);
  }
  plan_dct3_ = plan_cache().get(basis.dim(), n_, FFTW_REDFT01);
  plan_dct2_ = plan_cache().get(basis.dim(), n_, FFTW_REDFT10);
}

void CosineTransform::synthesize(double mean, std::span<const double> coeffs, std::span<double> grid) {
  std::fill(spec_.begin(), spec_.end(), 0.0);
  const int N = basis_.N();
  if (basis_.dim() == 1) {
    spec_[0] = mean;
    for (int j = 1; j <= N; ++j) spec_[j] = coeffs[j - 1] * synth_scale_[j];
  } else {
    spec_[0] = mean;
    std::size_t flat = 0;
    for (int k1 = 0; k1 <= N; ++k1) {
      for (int k2 = 0; k2 <= N; ++k2) {
        if (k1 == 0 && k2 == 0) continue;
        spec_[static_cast<std::size_t>(k1) * n_ + k2] =
            coeffs[flat++] * synth_scale_[k1] * synth_scale_[k2];
      }
    }
  }
  fftw_execute_r2r(static_cast<fftw_plan>(plan_dct3_), spec_.data(), grid.data());
}

void CosineTransform::analyze(std::span<const double> grid, double& mean, std::span<double> coeffs) {
  std::copy(grid.begin(), grid.end(), grid_.begin());
  fftw_execute_r2r(static_cast<fftw_plan>(plan_dct2_), grid_.data(), spec_.data());
  const int N = basis_.N();
  if (basis_.dim() == 1) {
    mean = spec_[0] * anal_scale_[0];
    for (int j = 1; j <= N; ++j) coeffs[j - 1] = spec_[j] * anal_scale_[j];
  } else {
    mean = spec_[0] * anal_scale_[0] * anal_scale_[0];
    std::size_t flat = 0;
    for (int k1 = 0; k1 <= N; ++k1) {
      for (int k2 = 0; k2 <= N; ++k2) {
        if (k1 == 0 && k2 == 0) continue;
        coeffs[flat++] = spec_[static_cast<std::size_t>(k1) * n_ + k2] * anal_scale_[k1] * anal_scale_[k2];
      }
    }
  }
}

}  // namespace tamedch
