// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo strong-error studies on coupled noise paths.
//
// Every sample s draws one fine path keyed by (seed, s). The reference run and
// every coarse run of that sample consume the same path, so their difference
// measures discretization error only. Per-sample results are stored by sample
// index and reduced pairwise in index order, which makes every report a pure
// function of the plan regardless of the worker count.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tamedch/dynamics.hpp"
#include "tamedch/noise.hpp"
#include "tamedch/spectral.hpp"

namespace tamedch {

enum class InitialCondition {
  CosPi,    // sqrt(2) cos(pi x1)
  CosPi20,  // 20 sqrt(2) cos(pi x1)
  Zero
};

std::string to_string(InitialCondition ic);
/// "cos_pi", "cos_pi_20", "zero".
InitialCondition initial_condition_from_string(const std::string& name);
SpectralField make_initial(InitialCondition ic, const BasisSpec& basis);

struct ExperimentPlan {
  BasisSpec basis{1, 64};
  NoiseKind noise_kind = NoiseKind::TraceClassLog;
  /// Used when noise_kind is Custom; an empty function means zero noise.
  NoiseSpec::CustomSpectrum custom_spectrum;
  InitialCondition ic = InitialCondition::CosPi;
  std::vector<Scheme> schemes{Scheme::TamedExpEuler};
  /// Coarse step counts; tau = T / M.
  std::vector<long> steps;
  /// Reference step count (temporal studies); must be a multiple of every entry of steps.
  long reference_steps = 1L << 14;
  /// Spatial studies: truncation levels compared against basis.N().
  std::vector<int> N_list;
  int samples = 200;
  std::uint64_t seed = 0;
  double T = 1.0;
  int n_grid = 0;
  Drift drift = Drift::Cubic;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  unsigned workers = 1;

  NoiseSpec noise() const;
  NoiseSpec noise_on(const BasisSpec& basis) const;
  SchemeConfig scheme_config(Scheme scheme, long M) const;
  /// Throws ArgumentError on empty step lists, non-nested grids, samples < 1
  /// or an N_list entry above basis.N().
  void validate_temporal() const;
  void validate_spatial() const;
  void validate_blowup() const;
};

struct ErrorRow {
  double h = 0.0;  // tau for temporal rows, lambda_N for spatial rows
  long M = 0;
  int N = 0;
  double error = 0.0;        // sqrt(mean squared error)
  double std_error = 0.0;  // delta-method standard error of error
  double mse = 0.0;
  double mse_stderr = 0.0;
  long samples = 0;
  long diverged_samples = 0;
  double wallclock_s = 0.0;
};

struct RateFit {
  double slope = 0.0;
  double std_error = 0.0;
  double residual = 0.0;  // root mean square of log residuals
};

struct ErrorReport {
  Scheme scheme = Scheme::TamedExpEuler;
  std::vector<ErrorRow> rows;
  RateFit fit;
  long samples = 0;
  std::uint64_t seed = 0;
};

/// Ordinary least squares of ln(error) on ln(h). Throws ArgumentError for fewer
/// than two points or a nonpositive value.
RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs);

/// Temporal errors of plan.schemes.front() against a tamed reference at
/// T / plan.reference_steps.
ErrorReport strong_temporal_error(const ExperimentPlan& plan);
/// One report per scheme in plan.schemes; all schemes share each sample's path and reference run.
std::vector<ErrorReport> strong_temporal_errors(const ExperimentPlan& plan);

/// Errors of truncation levels plan.N_list against N_ref = plan.basis.N(), all
/// at tau = T / plan.steps.front(), with the noise of the N_ref path projected
/// onto each level. The fitted slope is taken against lambda_N.
ErrorReport strong_spatial_error(const ExperimentPlan& plan);

struct BlowupRow {
  long M = 0;
  double mean_norm = 0.0;  // Inf / NaN propagate from the samples
  long diverged_samples = 0;
};

/// E||X_T|| over plan.samples for each M in plan.steps with plan.schemes.front().
std::vector<BlowupRow> blowup_table(const ExperimentPlan& plan);

struct CompareRow {
  double tau = 0.0;
  long M = 0;
  double error_tamed = 0.0;
  double error_backward = 0.0;
  double time_tamed = 0.0;
  double time_backward = 0.0;
};

struct Comparison {
  std::vector<CompareRow> rows;
  ErrorReport tamed;
  ErrorReport backward;
};

/// Tamed exponential Euler against backward Euler on coupled paths.
Comparison compare_schemes(const ExperimentPlan& plan);

/// Runs body(i) for i in [0, count) on up to `workers` threads. The exception
/// of the lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

/// Pairwise sum in index order.
double pairwise_sum(std::span<const double> values);

}  // namespace tamedch
