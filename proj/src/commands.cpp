// SPDX-License-Identifier: Apache-2.0
#include "tamedch/commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "tamedch/config.hpp"
#include "tamedch/errors.hpp"
#include "tamedch/report.hpp"
#include "tamedch/serialize.hpp"

namespace tamedch {
namespace {

namespace fs = std::filesystem;

struct Prepared {
  RunConfig config;
  ExperimentPlan plan;
  std::string hash;
  fs::path out_dir;
};

struct OutputFile {
  std::string name;
  std::string content;
};

Prepared prepare(const CliOptions& options) {
  Prepared p{load_run_config(options.config_path), {}, {}, {}};
  if (options.seed) p.config.seed = *options.seed;
  if (options.out_dir) p.config.out_dir = *options.out_dir;
  p.plan = make_plan(p.config, options.workers);
  p.hash = git_blob_sha1(p.config.canonical_text());
  p.out_dir = p.config.out_dir;
  return p;
}

// Turns module-level argument failures raised during validation into config errors.
template <typename F>
void validate(F&& check) {
  try {
    check();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  } catch (const IndexError& e) {
    throw ConfigError(e.what());
  }
}

std::string manifest(const std::string& command, const Prepared& p, const std::vector<OutputFile>& files) {
  nlohmann::ordered_json j;
  j["tool"] = "tamedch";
  j["command"] = command;
  j["config_sha1"] = p.hash;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  std::stringstream ss(p.config.canonical_text());
  std::string line;
  while (std::getline(ss, line)) {
    const auto eq = line.find(" = ");
    cfg[line.substr(0, eq)] = line.substr(eq + 3);
  }
  j["config"] = cfg;
  j["seed"] = p.config.seed;
  j["samples"] = p.config.samples;
  nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
  for (const auto& f : files) outputs.push_back(f.name);
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

void write_atomically(const fs::path& dir, const OutputFile& file) {
  const fs::path target = dir / file.name;
  const fs::path temp = dir / (file.name + ".tmp");
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", temp.string()));
    out << file.content;
    out.flush();
    if (!out) throw IoError(fmt::format("failed writing '{}'", temp.string()));
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) throw IoError(fmt::format("cannot rename '{}': {}", temp.string(), ec.message()));
}

void emit(const std::string& command, const Prepared& p, std::vector<OutputFile> files) {
  std::error_code ec;
  fs::create_directories(p.out_dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", p.out_dir.string(), ec.message()));
  files.push_back({"manifest.json", manifest(command, p, files)});
  for (const auto& f : files) write_atomically(p.out_dir, f);
}

int guarded(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error:config:" << e.what() << '\n';
    return kExitConfig;
  } catch (const SolverError& e) {
    err << "error:solver:" << e.what() << '\n';
    return kExitSolver;
  } catch (const IoError& e) {
    err << "error:io:" << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error:io:" << e.what() << '\n';
    return kExitIo;
  } catch (const ArgumentError& e) {
    err << "error:config:" << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error:solver:" << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace

int cmd_simulate(const CliOptions& options, std::ostream& err) {
  return guarded(err, [&] {
    Prepared p = prepare(options);
    validate([&] { p.plan.validate_blowup(); });
    const long M = p.plan.steps.front();
    const NoisePath path = sample_path(p.plan.noise(), p.plan.T, M, p.plan.seed, 0);
    std::vector<SpectralField> trajectory;
    const StepState final_state = evolve(make_initial(p.plan.ic, p.plan.basis), path,
                                         p.plan.scheme_config(p.plan.schemes.front(), M), &trajectory);

    std::ostringstream state_csv;
    write_field_csv(state_csv, final_state.field);
    std::ostringstream traj;
    traj << "# config_sha1=" << p.hash << '\n' << "step,t,mean,norm\n";
    for (std::size_t m = 0; m < trajectory.size(); ++m) {
      traj << m << ',' << format_double(p.plan.T * static_cast<double>(m) / static_cast<double>(M)) << ','
           << format_double(trajectory[m].mean()) << ',' << format_double(trajectory[m].norm()) << '\n';
    }
    emit("simulate", p, {{"final_state.csv", state_csv.str()}, {"trajectory.csv", traj.str()}});
  });
}

int cmd_convergence(const CliOptions& options, std::ostream& err) {
  return guarded(err, [&] {
    Prepared p = prepare(options);
    std::ostringstream csv;
    if (p.config.mode == ConvergenceMode::Temporal) {
      validate([&] { p.plan.validate_temporal(); });
      const ErrorReport report = strong_temporal_error(p.plan);
      write_temporal_csv(csv, report, p.hash, p.config.timing);
      emit("convergence", p, {{"convergence.csv", csv.str()}});
    } else {
      validate([&] { p.plan.validate_spatial(); });
      const ErrorReport report = strong_spatial_error(p.plan);
      write_spatial_csv(csv, report, p.hash, p.config.timing);
      emit("convergence", p, {{"spatial.csv", csv.str()}});
    }
  });
}

int cmd_blowup(const CliOptions& options, std::ostream& err) {
  return guarded(err, [&] {
    Prepared p = prepare(options);
    if (p.config.M_list.empty()) {
      p.plan.steps.resize(20);
      std::iota(p.plan.steps.begin(), p.plan.steps.end(), 1L);
    } else {
      p.plan.steps = p.config.M_list;
    }
    validate([&] { p.plan.validate_blowup(); });
    std::ostringstream csv;
    write_blowup_csv(csv, blowup_table(p.plan), p.hash);
    emit("blowup", p, {{"blowup.csv", csv.str()}});
  });
}

int cmd_compare(const CliOptions& options, std::ostream& err) {
  return guarded(err, [&] {
    Prepared p = prepare(options);
    validate([&] { p.plan.validate_temporal(); });
    std::ostringstream csv;
    write_compare_csv(csv, compare_schemes(p.plan), p.hash, p.config.timing);
    emit("compare", p, {{"compare.csv", csv.str()}});
  });
}

int run_command(const std::string& command, const CliOptions& options, std::ostream& err) {
  if (command == "simulate") return cmd_simulate(options, err);
  if (command == "convergence") return cmd_convergence(options, err);
  if (command == "blowup") return cmd_blowup(options, err);
  if (command == "compare") return cmd_compare(options, err);
  err << "error:config:unknown command '" << command << "'\n";
  return kExitConfig;
}

}  // namespace tamedch
