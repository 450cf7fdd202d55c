// SPDX-License-Identifier: Apache-2.0
//
// Time stepping for the spectral Galerkin system
//   dX + A(AX + P_N F(X)) dt = P_N dW,   F(u) = u^3 - u.
//
// All schemes act on the mean-zero coefficients only; the mean of the state is
// carried through every step untouched.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tamedch/noise.hpp"
#include "tamedch/spectral.hpp"
#include "tamedch/transform.hpp"

namespace tamedch {

enum class Scheme { TamedExpEuler, PlainExpEuler, BackwardEuler };

/// Switch for the cubic drift. None reduces every scheme to the linear SPDE.
enum class Drift { Cubic, None };

std::string to_string(Scheme scheme);
/// "tamed", "plain", "backward_euler" (case-sensitive).
Scheme scheme_from_string(const std::string& name);

struct SchemeConfig {
  double T = 1.0;
  long M = 1;
  Scheme scheme = Scheme::TamedExpEuler;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  Drift drift = Drift::Cubic;
  /// Collocation points per dimension; 0 selects BasisSpec::default_grid().
  int n_grid = 0;

  double tau() const noexcept { return T / static_cast<double>(M); }
  /// Throws ArgumentError on T <= 0, M < 1, tolerance outside (0, 1e-6] or max_iter < 1.
  void validate() const;
};

struct StepState {
  SpectralField field;
  long step_index = 0;
  bool diverged = false;
  std::optional<long> first_divergent_step = std::nullopt;
  /// Newton iterations spent in the last backward Euler step.
  int newton_iterations = 0;
};

/// Absolute coefficient size beyond which a state counts as diverged.
inline constexpr double kDivergenceThreshold = 1e150;

/// P_N P F(v) by collocation: evaluate v^3 - v on the grid, transform back,
/// drop the mean, keep modes up to N. Throws ArgumentError when n_grid is below
/// basis.min_cubic_grid().
SpectralField nemytskii_F(const SpectralField& v, int n_grid);

/// 1 / (1 + tau ||Fv||) with the coefficient l2 norm.
double taming_factor(const SpectralField& Fv, double tau);

StepState step_tamed(const StepState& s, const SpectralField& dW, double tau, int n_grid,
                     Drift drift = Drift::Cubic);
StepState step_plain(const StepState& s, const SpectralField& dW, double tau, int n_grid,
                     Drift drift = Drift::Cubic);
/// Solves (I + tau A^2) X+ + tau A P_N F(X+) = X + P_N dW by Newton iteration.
/// Throws SolverError when the scaled residual stays above tol after max_iter iterations.
StepState step_backward_euler(const StepState& s, const SpectralField& dW, double tau, int n_grid, double tol,
                              int max_iter, Drift drift = Drift::Cubic);

/// Reusable integrator for one (basis, tau, scheme). Holds precomputed
/// diagonal factors and scratch buffers; not thread-safe, cheap to create per
/// worker.
class Stepper {
 public:
  Stepper(BasisSpec basis, double tau, const SchemeConfig& cfg);

  const BasisSpec& basis() const noexcept { return basis_; }
  double tau() const noexcept { return tau_; }

  /// Advances `state` in place by one step with noise increment dW (mean-zero coefficients on the same basis).
  void step(StepState& state, std::span<const double> dW);

  /// Writes P_N P F(v) coefficients into out.
  void nonlinearity(const SpectralField& v, std::span<double> out);

 private:
  void step_exponential(StepState& state, std::span<const double> dW, bool tamed);
  void step_implicit(StepState& state, std::span<const double> dW);
  void cubic_derivative_on_grid(const SpectralField& u);
  void apply_jacobian_block(std::span<const double> x, std::span<double> out);
  void mark_divergence(StepState& state) const;

  BasisSpec basis_;
  double tau_;
  SchemeConfig cfg_;
  int n_grid_;
  CosineTransform transform_;
  std::vector<double> lambda_;
  std::vector<double> semigroup_;  // exp(-tau lambda^2)
  std::vector<double> phi_;        // (1 - exp(-tau lambda^2)) / lambda
  std::vector<double> implicit_;   // 1 + tau lambda^2
  std::vector<double> grid_;
  std::vector<double> grid_aux_;
  std::vector<double> f_;
  std::vector<double> work_[6];
};

/// Runs cfg.M steps from x0, consuming the path's increments coarsened to M
/// steps and projected onto x0's basis (the path basis may be finer).
/// Optionally records every state including the initial one. A diverged tamed
/// or backward Euler run throws SolverError; plain exponential Euler records
/// divergence in the returned state and keeps computing.
StepState evolve(const SpectralField& x0, const NoisePath& path, const SchemeConfig& cfg,
                 std::vector<SpectralField>* trajectory = nullptr);

}  // namespace tamedch
