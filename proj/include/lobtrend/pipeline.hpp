#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lobtrend/backtest.hpp"
#include "lobtrend/dataset.hpp"
#include "lobtrend/trainer.hpp"

namespace lobtrend {

enum class DataSource { Lobster, Synthetic, Fi2010 };
DataSource parse_source(std::string_view name);
std::string_view source_name(DataSource s);

struct RunConfig {
  DataSource source = DataSource::Synthetic;
  std::filesystem::path input;    // LOBSTER or FI-2010 directory
  std::filesystem::path out_dir = "run";
  std::vector<int> horizons{kDefaultHorizons.begin(), kDefaultHorizons.end()};
  double theta = 0.002;
  bool balance_theta = false;
  int window = 100;
  int stride = 10;
  int levels = kDefaultLevels;
  SplitSpec split = SplitSpec::six_two_two();
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};

  // synthetic source
  std::vector<std::string> synthetic_stocks{"SYNA", "SYNB"};
  std::size_t synthetic_days = 10;
  std::size_t synthetic_events = 20000;
  std::uint64_t synthetic_seed = 7;

  // baseline model and training
  std::vector<std::size_t> hidden{256};
  TrainConfig train;

  // ensembles and evaluation
  std::filesystem::path predictions_dir;  // external "<model>_k<k>_s<seed>.csv" files
  std::filesystem::path claims;           // optional CSV model,horizon,f1 (percent)
  bool per_horizon_weights = true;
  std::size_t meta_hidden = 64;
  TrainConfig meta_train{1e-4, 64, 100, Optimizer::SGD, 0};

  // backtest
  std::size_t bar_period = 10;
  StrategyConfig strategy;

  std::size_t workers = 0;  // 0: LOBTREND_WORKERS or hardware concurrency

  void validate() const;
};

/// Stock-day streams of the configured source, in stock then date order.
std::vector<DayStream> load_days(const RunConfig& config);

struct BuildOutput {
  std::map<int, std::filesystem::path> datasets;  // horizon -> file
  std::filesystem::path report;
};

/// One LOBD file per horizon plus a class-share report and per-day event mids
/// for the test split.
BuildOutput cmd_build_dataset(const RunConfig& config);

/// Trains the baseline for every (horizon, seed) on the built datasets and
/// writes models and test predictions.
void cmd_train(const RunConfig& config);

/// Test-split predictions of one model file on one dataset file.
PredictionSet cmd_predict(const std::filesystem::path& model, const std::filesystem::path& dataset,
                          std::uint64_t seed, const std::filesystem::path& out);

/// MAJORITY and METALOB over the given prediction files for one dataset.
void cmd_ensemble(const RunConfig& config, int horizon, const std::vector<std::filesystem::path>& prediction_files);

/// Metrics for every model found under the run directory (baseline and
/// external), ensembles per (horizon, seed), then the summary tables.
void cmd_evaluate(const RunConfig& config);

/// Summary tables from the per-run metrics file.
void cmd_report(const RunConfig& config);

/// Signal-driven strategy per stock from each predictions file's test split.
void cmd_backtest(const RunConfig& config);

/// Latency of the baseline model for one horizon at batch 1 and 64.
void cmd_latency(const RunConfig& config, int horizon, std::size_t repetitions);

/// Builds, trains, evaluates and backtests in one go.
void cmd_run_experiment(const RunConfig& config);

/// Records CRC32C of `files` (relative to the run directory) in manifest.json.
void update_manifest(const std::filesystem::path& out_dir, const std::string& command,
                     const std::vector<std::filesystem::path>& files);

std::string dataset_file_name(int horizon);
std::string prediction_file_name(const std::string& model, int horizon, std::uint64_t seed);

}  // namespace lobtrend
