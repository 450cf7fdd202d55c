// SPDX-License-Identifier: Apache-2.0
#include "tamedch/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include <fmt/format.h>

#include "tamedch/errors.hpp"

namespace tamedch {

std::string to_string(InitialCondition ic) {
  switch (ic) {
    case InitialCondition::CosPi: return "cos_pi";
    case InitialCondition::CosPi20: return "cos_pi_20";
    case InitialCondition::Zero: return "zero";
  }
  return "unknown";
}

InitialCondition initial_condition_from_string(const std::string& name) {
  if (name == "cos_pi") return InitialCondition::CosPi;
  if (name == "cos_pi_20") return InitialCondition::CosPi20;
  if (name == "zero") return InitialCondition::Zero;
  throw ArgumentError(fmt::format("unknown initial condition preset '{}'", name));
}

SpectralField make_initial(InitialCondition ic, const BasisSpec& basis) {
  switch (ic) {
    case InitialCondition::CosPi: return SpectralField::mode(basis, {1, 0}, 1.0);
    case InitialCondition::CosPi20: return SpectralField::mode(basis, {1, 0}, 20.0);
    case InitialCondition::Zero: return SpectralField(basis);
  }
  return SpectralField(basis);
}

NoiseSpec ExperimentPlan::noise() const { return noise_on(basis); }

NoiseSpec ExperimentPlan::noise_on(const BasisSpec& b) const {
  if (noise_kind == NoiseKind::Custom) {
    if (!custom_spectrum) return NoiseSpec::zero(b);
    return NoiseSpec(NoiseKind::Custom, b, custom_spectrum);
  }
  return NoiseSpec(noise_kind, b);
}

SchemeConfig ExperimentPlan::scheme_config(Scheme scheme, long M) const {
  SchemeConfig cfg;
  cfg.T = T;
  cfg.M = M;
  cfg.scheme = scheme;
  cfg.newton_tol = newton_tol;
  cfg.newton_max_iter = newton_max_iter;
  cfg.drift = drift;
  cfg.n_grid = n_grid;
  return cfg;
}

namespace {

void validate_common(const ExperimentPlan& plan) {
  if (plan.samples < 1) throw ArgumentError("samples must be >= 1");
  if (!(plan.T > 0.0)) throw ArgumentError("T must be > 0");
  if (plan.schemes.empty()) throw ArgumentError("at least one scheme is required");
  if (plan.steps.empty()) throw ArgumentError("step list is empty");
  for (long M : plan.steps) {
    if (M < 1) throw ArgumentError(fmt::format("step count {} must be >= 1", M));
  }
  plan.scheme_config(plan.schemes.front(), plan.steps.front()).validate();
  // Fails early on a grid below the dealiasing bound.
  if (plan.drift == Drift::Cubic && plan.n_grid != 0 && plan.n_grid < plan.basis.min_cubic_grid()) {
    throw ArgumentError(fmt::format("n_grid {} below the cubic dealiasing bound {}", plan.n_grid,
                                    plan.basis.min_cubic_grid()));
  }
}

}  // namespace

void ExperimentPlan::validate_temporal() const {
  validate_common(*this);
  if (reference_steps < 1) throw ArgumentError("reference step count must be >= 1");
  for (long M : steps) {
    if (reference_steps % M != 0) {
      throw ArgumentError(fmt::format("reference steps {} not a multiple of {}", reference_steps, M));
    }
  }
}

void ExperimentPlan::validate_spatial() const {
  validate_common(*this);
  if (N_list.empty()) throw ArgumentError("N list is empty");
  for (int N : N_list) {
    if (N < 1 || N > basis.N()) {
      throw ArgumentError(fmt::format("N = {} outside [1, N_ref = {}]", N, basis.N()));
    }
  }
}

void ExperimentPlan::validate_blowup() const { validate_common(*this); }

double pairwise_sum(std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (values.size() == 1) return values[0];
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (n == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) throw ArgumentError("rate fit needs at least two points");
  const auto n = static_cast<double>(pairs.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [h, e] : pairs) {
    if (!(h > 0.0) || !(e > 0.0)) throw ArgumentError(fmt::format("rate fit needs positive values, got ({}, {})", h, e));
    mx += std::log(h);
    my += std::log(e);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [h, e] : pairs) {
    const double dx = std::log(h) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(e) - my);
  }
  if (sxx == 0.0) throw ArgumentError("rate fit needs distinct abscissae");
  RateFit fit;
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (const auto& [h, e] : pairs) {
    const double r = std::log(e) - (intercept + fit.slope * std::log(h));
    ssr += r * r;
  }
  fit.residual = std::sqrt(ssr / n);
  fit.std_error = pairs.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
  return fit;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Aggregates per-sample squared errors into an error row.
ErrorRow summarize(std::span<const double> squared, std::span<const double> seconds, long diverged) {
  ErrorRow row;
  const auto S = static_cast<double>(squared.size());
  row.samples = static_cast<long>(squared.size());
  row.diverged_samples = diverged;
  row.mse = pairwise_sum(squared) / S;
  row.error = std::sqrt(row.mse);
  if (squared.size() > 1) {
    std::vector<double> dev(squared.size());
    for (std::size_t s = 0; s < squared.size(); ++s) dev[s] = (squared[s] - row.mse) * (squared[s] - row.mse);
    row.mse_stderr = std::sqrt(pairwise_sum(dev) / (S - 1.0) / S);
  }
  row.std_error = row.error > 0.0 ? row.mse_stderr / (2.0 * row.error) : 0.0;
  row.wallclock_s = pairwise_sum(seconds);
  return row;
}

RateFit fit_rows(const std::vector<ErrorRow>& rows) {
  std::vector<std::pair<double, double>> pairs;
  for (const auto& r : rows) {
    if (r.error > 0.0 && std::isfinite(r.error)) pairs.emplace_back(r.h, r.error);
  }
  if (pairs.size() < 2) return RateFit{NAN, NAN, NAN};
  return fit_rate(pairs);
}

}  // namespace

std::vector<ErrorReport> strong_temporal_errors(const ExperimentPlan& plan) {
  plan.validate_temporal();
  const NoiseSpec noise = plan.noise();
  const SpectralField x0 = make_initial(plan.ic, plan.basis);
  const std::size_t S = static_cast<std::size_t>(plan.samples);
  const std::size_t nsteps = plan.steps.size();
  const std::size_t nschemes = plan.schemes.size();
  const std::size_t slots = nschemes * nsteps;

  // [slot][sample], slot = scheme * nsteps + step
  std::vector<std::vector<double>> squared(slots, std::vector<double>(S));
  std::vector<std::vector<double>> seconds(slots, std::vector<double>(S));
  std::vector<std::vector<char>> diverged(slots, std::vector<char>(S, 0));

  parallel_for(S, plan.workers, [&](std::size_t s) {
    const NoisePath path = sample_path(noise, plan.T, plan.reference_steps, plan.seed, s);
    const SpectralField reference =
        evolve(x0, path, plan.scheme_config(Scheme::TamedExpEuler, plan.reference_steps)).field;
    for (std::size_t c = 0; c < nschemes; ++c) {
      for (std::size_t t = 0; t < nsteps; ++t) {
        const std::size_t slot = c * nsteps + t;
        const auto start = Clock::now();
        const StepState out = evolve(x0, path, plan.scheme_config(plan.schemes[c], plan.steps[t]));
        seconds[slot][s] = seconds_since(start);
        const double e = distance(reference, out.field);
        squared[slot][s] = e * e;
        diverged[slot][s] = out.diverged ? 1 : 0;
      }
    }
  });

  std::vector<ErrorReport> reports;
  for (std::size_t c = 0; c < nschemes; ++c) {
    ErrorReport report;
    report.scheme = plan.schemes[c];
    report.samples = plan.samples;
    report.seed = plan.seed;
    for (std::size_t t = 0; t < nsteps; ++t) {
      const std::size_t slot = c * nsteps + t;
      long div = 0;
      for (char d : diverged[slot]) div += d;
      ErrorRow row = summarize(squared[slot], seconds[slot], div);
      row.M = plan.steps[t];
      row.N = plan.basis.N();
      row.h = plan.T / static_cast<double>(plan.steps[t]);
      report.rows.push_back(row);
    }
    report.fit = fit_rows(report.rows);
    reports.push_back(std::move(report));
  }
  return reports;
}

ErrorReport strong_temporal_error(const ExperimentPlan& plan) {
  ExperimentPlan single = plan;
  single.schemes = {plan.schemes.empty() ? Scheme::TamedExpEuler : plan.schemes.front()};
  return strong_temporal_errors(single).front();
}

ErrorReport strong_spatial_error(const ExperimentPlan& plan) {
  plan.validate_spatial();
  const BasisSpec& ref_basis = plan.basis;
  const NoiseSpec noise = plan.noise();
  const SpectralField x0 = make_initial(plan.ic, ref_basis);
  const long M = plan.steps.front();
  const Scheme scheme = plan.schemes.front();
  const SchemeConfig cfg = plan.scheme_config(scheme, M);
  const std::size_t S = static_cast<std::size_t>(plan.samples);
  const std::size_t nlevels = plan.N_list.size();

  std::vector<std::vector<double>> squared(nlevels, std::vector<double>(S));
  std::vector<std::vector<double>> seconds(nlevels, std::vector<double>(S));
  std::vector<std::vector<char>> diverged(nlevels, std::vector<char>(S, 0));

  parallel_for(S, plan.workers, [&](std::size_t s) {
    const NoisePath path = sample_path(noise, plan.T, M, plan.seed, s);
    const SpectralField reference = evolve(x0, path, cfg).field;
    for (std::size_t l = 0; l < nlevels; ++l) {
      const BasisSpec level(ref_basis.dim(), plan.N_list[l]);
      const auto start = Clock::now();
      const StepState out = evolve(embed(x0, level), path, cfg);
      seconds[l][s] = seconds_since(start);
      const double e = distance(reference, embed(out.field, ref_basis));
      squared[l][s] = e * e;
      diverged[l][s] = out.diverged ? 1 : 0;
    }
  });

  ErrorReport report;
  report.scheme = scheme;
  report.samples = plan.samples;
  report.seed = plan.seed;
  for (std::size_t l = 0; l < nlevels; ++l) {
    long div = 0;
    for (char d : diverged[l]) div += d;
    ErrorRow row = summarize(squared[l], seconds[l], div);
    row.M = M;
    row.N = plan.N_list[l];
    row.h = std::numbers::pi * std::numbers::pi * plan.N_list[l] * plan.N_list[l];
    report.rows.push_back(row);
  }
  report.fit = fit_rows(report.rows);
  return report;
}

std::vector<BlowupRow> blowup_table(const ExperimentPlan& plan) {
  plan.validate_blowup();
  const NoiseSpec noise = plan.noise();
  const SpectralField x0 = make_initial(plan.ic, plan.basis);
  const std::size_t S = static_cast<std::size_t>(plan.samples);
  const std::size_t nM = plan.steps.size();
  std::vector<std::vector<double>> norms(nM, std::vector<double>(S));
  std::vector<std::vector<char>> diverged(nM, std::vector<char>(S, 0));

  parallel_for(S, plan.workers, [&](std::size_t s) {
    for (std::size_t i = 0; i < nM; ++i) {
      const long M = plan.steps[i];
      const NoisePath path = sample_path(noise, plan.T, M, plan.seed, s);
      const StepState out = evolve(x0, path, plan.scheme_config(plan.schemes.front(), M));
      norms[i][s] = out.field.norm();
      diverged[i][s] = out.diverged ? 1 : 0;
    }
  });

  std::vector<BlowupRow> rows;
  for (std::size_t i = 0; i < nM; ++i) {
    BlowupRow row;
    row.M = plan.steps[i];
    row.mean_norm = pairwise_sum(norms[i]) / static_cast<double>(S);
    for (char d : diverged[i]) row.diverged_samples += d;
    rows.push_back(row);
  }
  return rows;
}

Comparison compare_schemes(const ExperimentPlan& plan) {
  ExperimentPlan both = plan;
  both.schemes = {Scheme::TamedExpEuler, Scheme::BackwardEuler};
  auto reports = strong_temporal_errors(both);
  Comparison cmp;
  cmp.tamed = std::move(reports[0]);
  cmp.backward = std::move(reports[1]);
  for (std::size_t t = 0; t < plan.steps.size(); ++t) {
    CompareRow row;
    row.M = plan.steps[t];
    row.tau = plan.T / static_cast<double>(row.M);
    row.error_tamed = cmp.tamed.rows[t].error;
    row.error_backward = cmp.backward.rows[t].error;
    row.time_tamed = cmp.tamed.rows[t].wallclock_s;
    row.time_backward = cmp.backward.rows[t].wallclock_s;
    cmp.rows.push_back(row);
  }
  return cmp;
}

}  // namespace tamedch
