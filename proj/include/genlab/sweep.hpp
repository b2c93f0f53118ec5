#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "genlab/metrics.hpp"
#include "genlab/train.hpp"

namespace genlab {

// Capacity sweep: a full GAN + independent-discriminator protocol per
// (width, seed) cell.
struct SweepSpec {
  DistributionSpec dataset;
  std::vector<std::size_t> widths{4, 8, 16, 32, 64};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t baseline_width = 16;
  std::uint64_t master_seed = 1;

  SplitSizes splits;
  std::size_t latent_dim = 16;
  std::vector<std::size_t> gen_hidden = {64, 64};

  long long gan_steps = 20000;
  std::size_t batch_size = 64;
  AdamConfig adam;
  LossReduction loss_reduction = LossReduction::Mean;
  bool auxiliary = true;
  long long eval_every = 500;
  std::size_t gen_eval_count = 2048;

  long long ind_steps = 5000;
  std::size_t ind_batch_size = 64;
  double ind_base_lr = 0.01;
  double ind_floor_lr = 0.0;

  EmbeddingSpec embedding;

  // Artifact root; empty runs fully in memory (no checkpoints or logs).
  std::string out_dir = "out";

  void validate() const;
};

// One row of the sweep result table.  The l_ind_* columns come from critics
// trained on train1; the *_train2self columns are the achieved payoffs of
// the twin critics trained on train2 (symmetry check).  Failed cells keep
// NaNs and carry the failure text in `failure`.
struct SweepRow {
  std::size_t width = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string failure;

  static constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  double l_orig_train1 = nan, l_orig_test = nan;
  double l_aux_train1 = nan, l_aux_test = nan;
  double l_ind_match_train1 = nan, l_ind_match_train2 = nan,
         l_ind_match_test = nan;
  double l_ind_base_train1 = nan, l_ind_base_train2 = nan,
         l_ind_base_test = nan;
  double l_ind_match_train2self = nan, l_ind_base_train2self = nan;
  double generator_gap = nan, generator_gap_se = nan;
  bool underfit = false;
  double frechet_train1 = nan, frechet_test = nan;

  // Diagnostics kept out of the CSV (wall time would break byte-identical
  // reruns; the SEs are recomputable from checkpoints).
  double wall_seconds = 0.0;
  double se_orig_train1 = 0.0, se_aux_train1 = 0.0;
};

std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t width,
                        std::uint64_t seed_index);

// Runs one cell; never throws for training failures (they land in the row).
SweepRow run_cell(const SweepSpec& spec, std::size_t width,
                  std::uint64_t seed_index);

// All cells, optionally on a small thread pool.  Rows come back sorted by
// (width, seed) regardless of scheduling; on_row fires as cells finish.
std::vector<SweepRow> run_sweep(
    const SweepSpec& spec, int workers = 1,
    const std::function<void(const SweepRow&)>& on_row = {});

// results.csv column set, fixed order, 9 significant digits.
void write_rows_csv(const std::vector<SweepRow>& rows, const std::string& path);
std::vector<SweepRow> read_rows_csv(const std::string& path);

void write_rows_json(const std::vector<SweepRow>& rows,
                     const std::string& path);

// Strict JSON config: unknown or ill-typed keys are rejected by name.
// Required keys: dataset, widths, seeds; everything else falls back to the
// defaults above.
SweepSpec parse_sweep_config(const std::string& json_text);
SweepSpec load_sweep_config(const std::string& path);
std::string sweep_config_echo(const SweepSpec& spec);  // resolved config JSON

struct ExperimentResult {
  std::vector<SweepRow> rows;
  std::size_t failed_cells = 0;
};

// Full `run` entry point: sweep + results.csv/json, plots, config echo and
// per-cell artifacts under spec.out_dir.
ExperimentResult run_experiment(const SweepSpec& spec, int workers,
                                std::ostream& log);

}  // namespace genlab
