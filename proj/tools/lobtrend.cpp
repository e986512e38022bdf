#include <CLI11.hpp>
#include <iostream>

#include "lobtrend/error.hpp"
#include "lobtrend/kernels.hpp"
#include "lobtrend/pipeline.hpp"

using namespace lobtrend;

int main(int argc, char** argv) {
  CLI::App app{"lobtrend: limit order book trend-prediction pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value run config; flags override it");

  RunConfig cfg;
  std::string source = "synthetic";
  std::string optimizer = "adam";
  std::string meta_optimizer = "sgd";
  std::string weights = "per-horizon";

  app.add_option("--source", source, "lobster | synthetic | fi2010")->capture_default_str();
  app.add_option("--input", cfg.input, "LOBSTER or FI-2010 directory");
  app.add_option("--out", cfg.out_dir, "run directory")->capture_default_str();
  app.add_option("--horizons", cfg.horizons, "prediction horizons, sampled steps")->delimiter(',')->capture_default_str();
  app.add_option("--theta", cfg.theta, "label threshold")->capture_default_str();
  app.add_flag("--balance-theta", cfg.balance_theta, "pick theta per horizon to balance train classes");
  app.add_option("--window", cfg.window, "history length h")->capture_default_str();
  app.add_option("--stride", cfg.stride, "events per sampled record")->capture_default_str();
  app.add_option("--levels", cfg.levels, "book levels per side")->capture_default_str();
  app.add_option("--train-days", cfg.split.train_days)->capture_default_str();
  app.add_option("--val-days", cfg.split.val_days)->capture_default_str();
  app.add_option("--test-days", cfg.split.test_days)->capture_default_str();
  app.add_option("--val-fraction", cfg.split.val_fraction, "FI-2010 validation share of the train file")
      ->capture_default_str();
  app.add_option("--seeds", cfg.seeds)->delimiter(',')->capture_default_str();
  app.add_option("--stocks", cfg.synthetic_stocks, "synthetic symbols")->delimiter(',')->capture_default_str();
  app.add_option("--days", cfg.synthetic_days, "synthetic days per stock")->capture_default_str();
  app.add_option("--events", cfg.synthetic_events, "synthetic events per day")->capture_default_str();
  app.add_option("--synthetic-seed", cfg.synthetic_seed)->capture_default_str();
  app.add_option("--hidden", cfg.hidden, "baseline hidden widths")->delimiter(',')->capture_default_str();
  app.add_option("--learning-rate", cfg.train.learning_rate)->capture_default_str();
  app.add_option("--batch", cfg.train.batch_size)->capture_default_str();
  app.add_option("--epochs", cfg.train.epochs)->capture_default_str();
  app.add_option("--optimizer", optimizer, "adam | sgd | rmsprop")->capture_default_str();
  app.add_option("--predictions", cfg.predictions_dir, "directory of external prediction files");
  app.add_option("--claims", cfg.claims, "CSV model,horizon,f1 of claimed scores");
  app.add_option("--weights", weights, "per-horizon | global MAJORITY weights")->capture_default_str();
  app.add_option("--meta-hidden", cfg.meta_hidden)->capture_default_str();
  app.add_option("--meta-learning-rate", cfg.meta_train.learning_rate)->capture_default_str();
  app.add_option("--meta-batch", cfg.meta_train.batch_size)->capture_default_str();
  app.add_option("--meta-epochs", cfg.meta_train.epochs)->capture_default_str();
  app.add_option("--meta-optimizer", meta_optimizer)->capture_default_str();
  app.add_option("--bar-period", cfg.bar_period, "events per OHLC bar")->capture_default_str();
  app.add_option("--capital", cfg.strategy.capital)->capture_default_str();
  app.add_option("--shares", cfg.strategy.shares_per_trade, "shares per trade")->capture_default_str();
  app.add_option("--workers", cfg.workers, "0: LOBTREND_WORKERS or all cores")->capture_default_str();

  auto* build = app.add_subcommand("build-dataset", "reconstruct books, label and write one dataset per horizon");
  auto* train = app.add_subcommand("train", "train the baseline per horizon and seed");
  auto* predict = app.add_subcommand("predict", "test-split predictions of one model file");
  std::filesystem::path model_path, dataset_path, pred_out;
  std::uint64_t pred_seed = 0;
  predict->add_option("--model", model_path)->required();
  predict->add_option("--dataset", dataset_path)->required();
  predict->add_option("--output", pred_out)->required();
  predict->add_option("--seed", pred_seed);
  auto* ensemble = app.add_subcommand("ensemble", "MAJORITY and METALOB over prediction files");
  int ens_horizon = 5;
  std::vector<std::filesystem::path> ens_files;
  ensemble->add_option("--horizon", ens_horizon)->required();
  ensemble->add_option("files", ens_files)->required();
  auto* evaluate = app.add_subcommand("evaluate", "metrics, ensembles and summary tables");
  auto* backtest = app.add_subcommand("backtest", "trade each prediction file's signals");
  auto* latency = app.add_subcommand("latency", "baseline inference latency");
  int lat_horizon = 5;
  std::size_t lat_reps = 30;
  latency->add_option("--horizon", lat_horizon)->capture_default_str();
  latency->add_option("--repetitions", lat_reps)->capture_default_str();
  auto* report = app.add_subcommand("report", "summary tables from evaluate's metrics");
  auto* run = app.add_subcommand("run", "build-dataset, train, evaluate and backtest");
  auto* info = app.add_subcommand("info", "print the selected SIMD level");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    cfg.source = parse_source(source);
    cfg.train.optimizer = parse_optimizer(optimizer);
    cfg.meta_train.optimizer = parse_optimizer(meta_optimizer);
    if (weights != "per-horizon" && weights != "global") fail(Errc::ConfigError, "--weights: per-horizon or global");
    cfg.per_horizon_weights = weights == "per-horizon";

    if (*build) {
      const auto out = cmd_build_dataset(cfg);
      for (const auto& [k, path] : out.datasets) std::cout << "k=" << k << " " << path.string() << "\n";
    } else if (*train) {
      cmd_train(cfg);
    } else if (*predict) {
      const auto p = cmd_predict(model_path, dataset_path, pred_seed, pred_out);
      std::cout << p.size() << " predictions -> " << pred_out.string() << "\n";
    } else if (*ensemble) {
      cmd_ensemble(cfg, ens_horizon, ens_files);
    } else if (*evaluate) {
      cmd_evaluate(cfg);
    } else if (*backtest) {
      cmd_backtest(cfg);
    } else if (*latency) {
      cmd_latency(cfg, lat_horizon, lat_reps);
    } else if (*report) {
      cmd_report(cfg);
    } else if (*run) {
      cmd_run_experiment(cfg);
    } else if (*info) {
      std::cout << "simd: " << kernels::level_name(kernels::active().level) << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
