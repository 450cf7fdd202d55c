// SPDX-License-Identifier: Apache-2.0
//
// Flat "key = value" run configuration. Lines starting with '#' and blank
// lines are ignored. Recognized keys:
//
//   dim, N, n_grid, T, noise.kind, noise.seed, scheme, tau.list, tau.ref,
//   samples, ic.preset, out.dir, mode, N.list, M.list, nonlinearity, timing,
//   newton.tol, newton.max_iter
//
// Step sizes accept decimal numbers or powers of two written as "2^-9".
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tamedch/experiments.hpp"

namespace tamedch {

enum class ConvergenceMode { Temporal, Spatial };

struct RunConfig {
  int dim = 1;
  int N = 64;
  int n_grid = 0;
  double T = 1.0;
  std::string noise_kind = "trace_class_log";
  std::uint64_t seed = 0;
  std::string scheme = "tamed";
  std::vector<double> tau_list{0x1p-9, 0x1p-10, 0x1p-11, 0x1p-12};
  double tau_ref = 0x1p-16;
  int samples = 200;
  std::string ic_preset = "cos_pi";
  std::string out_dir = "out";
  ConvergenceMode mode = ConvergenceMode::Temporal;
  std::vector<int> N_list;
  std::vector<long> M_list;
  std::string nonlinearity = "cubic";
  bool timing = true;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;

  /// Effective settings as sorted "key = value" lines; hashed for the manifest.
  std::string canonical_text() const;
};

/// Throws ConfigError on unknown keys, duplicate keys, or unparsable values.
RunConfig parse_run_config(const std::string& text);
/// Throws IoError when the file cannot be read.
RunConfig load_run_config(const std::string& path);

/// "2^-9" or a decimal. Throws ConfigError.
double parse_step_size(const std::string& text);
/// Number of uniform steps of size tau in [0, T]; throws ConfigError unless T / tau is an integer.
long steps_for(double T, double tau);

/// Translates the configuration into an experiment plan; throws ConfigError
/// when any value violates a precondition of the modules involved.
ExperimentPlan make_plan(const RunConfig& cfg, unsigned workers);

}  // namespace tamedch
