// Command-line front end: one experiment per invocation, reproducible report
// bodies (byte-identical for identical configs), runtime metadata in a
// sidecar file so the body stays a pure function of the config.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cascade {

enum class ExperimentKind {
  criticality,
  mean,
  tail_sup,
  fourth_moment,
  barrier,
  modulus,
  variation,
  many_to_one,
  ballot,
  exp_sum,
  identities,
};

const char* experiment_name(ExperimentKind k);
ExperimentKind experiment_from_name(const std::string& name);

struct RunConfig {
  ExperimentKind experiment = ExperimentKind::identities;
  double gamma = 0.7;
  double beta = 0.3;
  int depth = 12;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 0;
  double epsilon0 = 0.05;
  std::vector<double> x_grid;  // empty: per-experiment default
  std::vector<int> l_grid;     // depth/level grid; empty: per-experiment default
  double x = 1.0;              // walk start (ballot, exp_sum); offset (fourth_moment)
  double a = 0.0;              // ballot window
  double b = 2.0;
  double kappa = 1.0;          // exp_sum decay rate
  std::uint64_t horizon = 256; // exp_sum starting horizon
  int threads = 0;             // 0: CASCADE_LAB_THREADS, then hardware
  bool breadth_mode = false;   // force breadth-first (level-array) simulation
  bool bbox_diameters = false; // bounding-box oscillation mode (flagged in output)
  std::string output;          // empty: stdout
  enum class Format { json, csv };
  Format format = Format::json;
  bool trials_explicit = false;
  bool x_explicit = false;
};

// Fill empty grids with the per-experiment defaults and validate ranges;
// throws std::invalid_argument on inconsistent requests.
RunConfig resolve_defaults(const RunConfig& cfg);

// throws std::invalid_argument on bad values (including CLI syntax errors)
RunConfig parse_config(const std::vector<std::string>& args);

// 0: success; 1: an exactness check failed; 2: resource limit hit
int run(const RunConfig& cfg);

// full front end: parse errors exit 64, --help exits 0
int cli_main(int argc, char** argv);

}  // namespace cascade
