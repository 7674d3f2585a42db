#pragma once

#include <string>
#include <vector>

#include "isoscope/json_io.hpp"

namespace isoscope {

/// One flat record of an experiment sweep. reference_scale is the theorem's
/// right-hand side with its absolute constant stripped; ratio is
/// estimate / reference_scale. wall_ms is measurement metadata and is the
/// one column excluded from the byte-identical reproducibility guarantee.
struct ResultRow {
  std::string experiment;
  int n = 0;
  double k_or_q = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double estimate = 0;
  double stderr_ = 0;
  double reference_scale = 0;
  double ratio = 0;
  double wall_ms = 0;
  bool error = false;
  std::string error_msg;
};

struct Bracket {
  double lo = 0;
  double hi = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  json metadata;
};

struct Summary {
  struct Cell {
    int n;
    double k_or_q;
    int trials;
    double mean_ratio, min_ratio, max_ratio;
  };
  std::vector<Cell> cells;
  double success_frequency = 0;  // rows with ratio inside the bracket
  double slope = 0, slope_stderr = 0;  // log-ratio against log swept variable
  std::string swept;
};

std::vector<std::string> experiment_names();
bool is_experiment(const std::string& name);
json experiment_default_config(const std::string& name);
/// Pre-registered ratio bracket (from oracle runs at the smallest grid point).
Bracket experiment_bracket(const std::string& name);
/// Which column the trend test sweeps: "n" or "k_or_q".
std::string experiment_swept(const std::string& name);

/// Runs a named experiment. config overrides the experiment defaults; rows
/// come back in deterministic (cell, trial) order for any worker count.
ExperimentResult run_experiment(const std::string& name, const json& config);

Summary summarize(const std::vector<ResultRow>& rows, const Bracket& bracket,
                  const std::string& swept);
json summary_to_json(const Summary& s);

/// CSV data line without the trailing wall_ms column (the reproducible part).
std::string csv_data_fields(const ResultRow& r);
void write_csv(const std::vector<ResultRow>& rows, const std::string& path);
void write_metadata_sidecar(const json& metadata, const std::string& csv_path);

/// Reference volume-one bodies for sweeps, by kind name:
/// "cube" | "cross" | "ball" | "simplex".
BodyPtr reference_body(const std::string& kind, int n);
/// Z_q-experiment measures by kind name: "gaussian" | "mu_cube" | "laplace".
LogConcaveMeasure reference_measure(const std::string& kind, int n);
/// Isotropic constant used in reference scales for the kind above.
double reference_L(const std::string& kind, int n);

}  // namespace isoscope
