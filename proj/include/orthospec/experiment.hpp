#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "orthospec/config.hpp"
#include "orthospec/spectral.hpp"

namespace orthospec {

/// Creates dir, refusing to reuse a non-empty one unless force is set.
void prepare_output_dir(const std::filesystem::path& dir, bool force);

struct TrialRow {
  std::string ensemble;
  std::string func;
  double delta_nominal = 0.0;
  TrialResult result;
  std::string error;  // non-empty when the trial failed
};

struct SweepRow {
  std::string ensemble;
  std::string func;
  double delta_nominal = 0.0;
  double delta_realized = 0.0;
  double p2_mean = 0.0;
  double p2_std = 0.0;
  double p2_pred = 0.0;
  std::size_t trials = 0;     // successful trials
  std::size_t failures = 0;
  std::size_t converged = 0;
};

struct SweepCell {
  std::string ensemble;
  std::string func;
  double delta = 0.0;
};

struct SweepOutput {
  std::vector<TrialRow> trials;  // sorted by cell, then seed
  std::vector<SweepRow> rows;    // sorted by (ensemble, func, delta)
  std::vector<std::string> skipped;
};

/// Trial k of every cell uses seed base + k, so cells share signals and
/// operators up to their size. Trials run in parallel; a failing trial is
/// recorded and the sweep continues.
SweepOutput run_sweep(const std::vector<SweepCell>& cells, std::size_t n, std::size_t trials,
                      std::uint64_t base_seed, const SweepConfig& limits,
                      const QuadratureSpec& q);

/// The cells named by a sweep config: ensembles x funcs x delta_grid, minus
/// CDP at non-integer delta (listed in `skipped`).
std::vector<SweepCell> sweep_cells(const SweepConfig& cfg, std::vector<std::string>& skipped);

void write_trials_csv(std::ostream& os, const std::vector<TrialRow>& rows);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// Each command writes its files plus resolved.toml into cfg.output_dir.
void cmd_predict(const ExperimentConfig& cfg, bool force, std::ostream& log);
void cmd_sweep(const ExperimentConfig& cfg, bool force, std::ostream& log);
void cmd_pcaep(const ExperimentConfig& cfg, bool force, std::ostream& log);
void cmd_spectrum(const ExperimentConfig& cfg, bool force, std::ostream& log);

}  // namespace orthospec
