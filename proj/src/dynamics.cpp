// SPDX-License-Identifier: Apache-2.0
#include "tamedch/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "tamedch/errors.hpp"

namespace tamedch {

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::TamedExpEuler: return "tamed";
    case Scheme::PlainExpEuler: return "plain";
    case Scheme::BackwardEuler: return "backward_euler";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "tamed") return Scheme::TamedExpEuler;
  if (name == "plain") return Scheme::PlainExpEuler;
  if (name == "backward_euler") return Scheme::BackwardEuler;
  throw ArgumentError(fmt::format("unknown scheme '{}'", name));
}

void SchemeConfig::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw ArgumentError(fmt::format("T must be > 0, got {}", T));
  if (M < 1) throw ArgumentError(fmt::format("M must be >= 1, got {}", M));
  if (!(newton_tol > 0.0 && newton_tol <= 1e-6)) {
    throw ArgumentError(fmt::format("newton_tol must lie in (0, 1e-6], got {}", newton_tol));
  }
  if (newton_max_iter < 1) throw ArgumentError("newton_max_iter must be >= 1");
  if (n_grid < 0) throw ArgumentError("n_grid must be >= 0");
}

namespace {

int resolve_grid(const BasisSpec& basis, int n_grid, Drift drift) {
  const int n = n_grid == 0 ? basis.default_grid() : n_grid;
  if (drift == Drift::Cubic && n < basis.min_cubic_grid()) {
    throw ArgumentError(fmt::format("n_grid {} below the cubic dealiasing bound 2N+1 = {}", n,
                                    basis.min_cubic_grid()));
  }
  return n;
}

double l2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

Stepper::Stepper(BasisSpec basis, double tau, const SchemeConfig& cfg)
    : basis_(basis),
      tau_(tau),
      cfg_(cfg),
      n_grid_(resolve_grid(basis, cfg.n_grid, cfg.drift)),
      transform_(basis, n_grid_),
      lambda_(basis.eigenvalues()) {
  if (!(tau > 0.0)) throw ArgumentError(fmt::format("step size must be > 0, got {}", tau));
  const std::size_t n = lambda_.size();
  semigroup_.resize(n);
  phi_.resize(n);
  implicit_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double l2 = lambda_[i] * lambda_[i];
    semigroup_[i] = std::exp(-tau * l2);
    phi_[i] = -std::expm1(-tau * l2) / lambda_[i];
    implicit_[i] = 1.0 + tau * l2;
  }
  grid_.resize(transform_.grid_size());
  grid_aux_.resize(transform_.grid_size());
  f_.resize(n);
  for (auto& w : work_) w.resize(n);
}

void Stepper::nonlinearity(const SpectralField& v, std::span<double> out) {
  if (cfg_.drift == Drift::None) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  transform_.synthesize(v.mean(), v.coeffs(), grid_);
  for (double& u : grid_) u = u * u * u - u;
  double mean = 0.0;
  transform_.analyze(grid_, mean, out);
}

void Stepper::mark_divergence(StepState& state) const {
  if (state.diverged) return;
  for (double c : state.field.coeffs()) {
    if (!std::isfinite(c) || std::abs(c) > kDivergenceThreshold) {
      state.diverged = true;
      state.first_divergent_step = state.step_index;
      return;
    }
  }
}

void Stepper::step(StepState& state, std::span<const double> dW) {
  switch (cfg_.scheme) {
    case Scheme::TamedExpEuler: step_exponential(state, dW, true); break;
    case Scheme::PlainExpEuler: step_exponential(state, dW, false); break;
    case Scheme::BackwardEuler: step_implicit(state, dW); break;
  }
}

void Stepper::step_exponential(StepState& state, std::span<const double> dW, bool tamed) {
  nonlinearity(state.field, f_);
  const double factor = tamed ? 1.0 / (1.0 + tau_ * l2(f_)) : 1.0;
  auto x = state.field.coeffs();
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = semigroup_[i] * x[i] - factor * (phi_[i] * f_[i]) + semigroup_[i] * dW[i];
  }
  ++state.step_index;
  mark_divergence(state);
}

// Multiplier 3u^2 - 1 of the linearized nonlinearity, sampled on the grid.
void Stepper::cubic_derivative_on_grid(const SpectralField& u) {
  transform_.synthesize(u.mean(), u.coeffs(), grid_aux_);
  for (double& g : grid_aux_) g = 3.0 * g * g - 1.0;
}

// out = (D / lambda) x + tau P_N P [(3u^2 - 1) x]; symmetric positive definite for tau < 4.
void Stepper::apply_jacobian_block(std::span<const double> x, std::span<double> out) {
  transform_.synthesize(0.0, x, grid_);
  for (std::size_t g = 0; g < grid_.size(); ++g) grid_[g] *= grid_aux_[g];
  double mean = 0.0;
  transform_.analyze(grid_, mean, out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = implicit_[i] / lambda_[i] * x[i] + tau_ * out[i];
}

void Stepper::step_implicit(StepState& state, std::span<const double> dW) {
  const std::size_t n = lambda_.size();
  auto x = state.field.coeffs();
  std::vector<double>& rhs = work_[0];
  for (std::size_t i = 0; i < n; ++i) rhs[i] = (x[i] + dW[i]) / implicit_[i];

  if (cfg_.drift == Drift::None) {
    std::copy(rhs.begin(), rhs.end(), x.begin());
    state.newton_iterations = 0;
    ++state.step_index;
    mark_divergence(state);
    return;
  }

  // Scaled residual G(y) = y + tau (lambda / D) P_N F(y) - (x + dW) / D, started
  // from the linearly implicit predictor.
  nonlinearity(state.field, f_);
  SpectralField y = state.field;
  for (std::size_t i = 0; i < n; ++i) y[i] = rhs[i] - tau_ * lambda_[i] / implicit_[i] * f_[i];

  std::vector<double>& G = work_[1];
  std::vector<double>& r = work_[2];
  std::vector<double>& z = work_[3];
  std::vector<double>& p = work_[4];
  std::vector<double>& Ap = work_[5];
  std::vector<double> delta(n);
  std::vector<double> precond(n);

  double residual = 0.0;
  for (int it = 0;; ++it) {
    nonlinearity(y, f_);
    for (std::size_t i = 0; i < n; ++i) G[i] = y[i] + tau_ * lambda_[i] / implicit_[i] * f_[i] - rhs[i];
    residual = l2(G);
    if (!std::isfinite(residual)) {
      throw SolverError(fmt::format("backward Euler residual not finite at step {}", state.step_index + 1),
                        residual, it);
    }
    if (residual < cfg_.newton_tol) {
      state.newton_iterations = it;
      break;
    }
    if (it >= cfg_.newton_max_iter) {
      throw SolverError(fmt::format("backward Euler Newton did not converge at step {}: residual {:.3e} after {} "
                                    "iterations",
                                    state.step_index + 1, residual, it),
                        residual, it);
    }

    // (D / lambda + tau J) delta = -(D / lambda) G by preconditioned CG.
    cubic_derivative_on_grid(y);
    double avg = 0.0;
    for (double g : grid_aux_) avg += g;
    avg /= static_cast<double>(grid_aux_.size());
    for (std::size_t i = 0; i < n; ++i) {
      const double d = implicit_[i] / lambda_[i];
      precond[i] = std::max(d + tau_ * avg, 0.5 * d);
      r[i] = -d * G[i];
      delta[i] = 0.0;
    }
    const double rhs_norm = l2(r);
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / precond[i];
    std::copy(z.begin(), z.end(), p.begin());
    double rz = dot(r, z);
    const int cg_max = static_cast<int>(std::min<std::size_t>(4 * n + 20, 1000));
    for (int k = 0; k < cg_max && l2(r) > 1e-13 * rhs_norm; ++k) {
      apply_jacobian_block(p, Ap);
      const double alpha = rz / dot(p, Ap);
      for (std::size_t i = 0; i < n; ++i) {
        delta[i] += alpha * p[i];
        r[i] -= alpha * Ap[i];
      }
      for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / precond[i];
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    for (std::size_t i = 0; i < n; ++i) y[i] += delta[i];
  }
  std::copy(y.coeffs().begin(), y.coeffs().end(), x.begin());
  ++state.step_index;
  mark_divergence(state);
}

SpectralField nemytskii_F(const SpectralField& v, int n_grid) {
  SchemeConfig cfg;
  cfg.n_grid = n_grid;
  if (n_grid < v.basis().min_cubic_grid()) {
    throw ArgumentError(fmt::format("n_grid {} below the cubic dealiasing bound 2N+1 = {}", n_grid,
                                    v.basis().min_cubic_grid()));
  }
  Stepper stepper(v.basis(), 1.0, cfg);
  SpectralField out(v.basis());
  stepper.nonlinearity(v, out.coeffs());
  return out;
}

double taming_factor(const SpectralField& Fv, double tau) { return 1.0 / (1.0 + tau * Fv.norm()); }

namespace {

StepState single_step(const StepState& s, const SpectralField& dW, double tau, SchemeConfig cfg) {
  if (!(dW.basis() == s.field.basis())) throw ArgumentError("noise increment lives on a different basis");
  if (dW.mean() != 0.0) throw ContractError("noise increment must have zero mean");
  cfg.T = tau;
  cfg.M = 1;
  Stepper stepper(s.field.basis(), tau, cfg);
  StepState out = s;
  stepper.step(out, dW.coeffs());
  return out;
}

}  // namespace

StepState step_tamed(const StepState& s, const SpectralField& dW, double tau, int n_grid, Drift drift) {
  SchemeConfig cfg;
  cfg.scheme = Scheme::TamedExpEuler;
  cfg.n_grid = n_grid;
  cfg.drift = drift;
  StepState out = single_step(s, dW, tau, cfg);
  if (out.diverged) throw SolverError(fmt::format("tamed scheme diverged at step {}", out.step_index));
  return out;
}

StepState step_plain(const StepState& s, const SpectralField& dW, double tau, int n_grid, Drift drift) {
  SchemeConfig cfg;
  cfg.scheme = Scheme::PlainExpEuler;
  cfg.n_grid = n_grid;
  cfg.drift = drift;
  return single_step(s, dW, tau, cfg);
}

StepState step_backward_euler(const StepState& s, const SpectralField& dW, double tau, int n_grid, double tol,
                              int max_iter, Drift drift) {
  SchemeConfig cfg;
  cfg.scheme = Scheme::BackwardEuler;
  cfg.n_grid = n_grid;
  cfg.drift = drift;
  cfg.newton_tol = tol;
  cfg.newton_max_iter = max_iter;
  StepState out = single_step(s, dW, tau, cfg);
  if (out.diverged) throw SolverError(fmt::format("backward Euler diverged at step {}", out.step_index));
  return out;
}

StepState evolve(const SpectralField& x0, const NoisePath& path, const SchemeConfig& cfg,
                 std::vector<SpectralField>* trajectory) {
  cfg.validate();
  const BasisSpec& basis = x0.basis();
  const BasisSpec& path_basis = path.spec().basis();
  if (path_basis.dim() != basis.dim() || path_basis.N() < basis.N()) {
    throw ArgumentError("noise path basis must have the state's dimension and at least its N");
  }
  if (std::abs(path.T() - cfg.T) > 1e-12 * cfg.T) throw ArgumentError("noise path horizon differs from T");
  if (path.M_fine() % cfg.M != 0) {
    throw ArgumentError(fmt::format("M = {} does not divide the path's M_fine = {}", cfg.M, path.M_fine()));
  }

  std::vector<std::size_t> gather(basis.mode_count());
  for (std::size_t i = 0; i < gather.size(); ++i) gather[i] = path_basis.flat_index(basis.mode(i));

  Stepper stepper(basis, cfg.tau(), cfg);
  StepState state{x0};
  if (trajectory != nullptr) {
    trajectory->clear();
    trajectory->push_back(x0);
  }
  std::vector<double> coarse(path.modes());
  std::vector<double> dW(basis.mode_count());
  std::vector<double> scratch;
  for (long m = 0; m < cfg.M; ++m) {
    path.coarse_increment(cfg.M, m, coarse, scratch);
    for (std::size_t i = 0; i < dW.size(); ++i) dW[i] = coarse[gather[i]];
    stepper.step(state, dW);
    if (state.diverged && cfg.scheme != Scheme::PlainExpEuler) {
      throw SolverError(fmt::format("{} scheme diverged at step {}", to_string(cfg.scheme), state.step_index));
    }
    if (trajectory != nullptr) trajectory->push_back(state.field);
  }
  return state;
}

}  // namespace tamedch
