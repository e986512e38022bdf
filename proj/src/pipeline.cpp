#include "lobtrend/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>

#include "lobtrend/checksum.hpp"
#include "lobtrend/ensemble.hpp"
#include "lobtrend/error.hpp"
#include "lobtrend/ingest.hpp"
#include "lobtrend/labeling.hpp"
#include "lobtrend/latency.hpp"
#include "lobtrend/metrics.hpp"
#include "lobtrend/parallel.hpp"
#include "lobtrend/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lobtrend {

DataSource parse_source(std::string_view name) {
  if (name == "lobster") return DataSource::Lobster;
  if (name == "synthetic") return DataSource::Synthetic;
  if (name == "fi2010") return DataSource::Fi2010;
  fail(Errc::ConfigError, "unknown source '" + std::string(name) + "' (lobster, synthetic, fi2010)");
}

std::string_view source_name(DataSource s) {
  switch (s) {
    case DataSource::Lobster: return "lobster";
    case DataSource::Synthetic: return "synthetic";
    case DataSource::Fi2010: return "fi2010";
  }
  return "?";
}

void RunConfig::validate() const {
  if (horizons.empty()) fail(Errc::ConfigError, "no horizons");
  for (int k : horizons) {
    if (k < 1) fail(Errc::ConfigError, "horizon must be >= 1");
    if (source == DataSource::Fi2010 &&
        std::find(kFi2010Horizons.begin(), kFi2010Horizons.end(), k) == kFi2010Horizons.end()) {
      fail(Errc::ConfigError, "FI-2010 ships labels only for k in {1,2,3,5,10}");
    }
  }
  if (!(theta > 0 && theta < 1)) fail(Errc::ConfigError, "theta must lie in (0, 1)");
  if (window < 1 || stride < 1 || levels < 1) fail(Errc::ConfigError, "window, stride and levels must be >= 1");
  if (seeds.empty()) fail(Errc::ConfigError, "no seeds");
  if (source != DataSource::Synthetic && input.empty()) fail(Errc::ConfigError, "input directory required");
  if (source == DataSource::Synthetic && (synthetic_stocks.empty() || synthetic_events == 0)) {
    fail(Errc::ConfigError, "synthetic source needs stocks and events");
  }
  if (hidden.empty()) fail(Errc::ConfigError, "baseline needs a hidden layer");
  if (bar_period < 1) fail(Errc::ConfigError, "bar period must be >= 1");
  train.validate();
  meta_train.validate();
}

std::string dataset_file_name(int horizon) { return "dataset_k" + std::to_string(horizon) + ".lobd"; }

std::string prediction_file_name(const std::string& model, int horizon, std::uint64_t seed) {
  return model + "_k" + std::to_string(horizon) + "_s" + std::to_string(seed) + ".csv";
}

namespace {

constexpr const char* kBaselineId = "MLP";

fs::path datasets_dir(const RunConfig& c) { return c.out_dir / "datasets"; }
fs::path models_dir(const RunConfig& c) { return c.out_dir / "models"; }
fs::path predictions_dir(const RunConfig& c) { return c.out_dir / "predictions"; }
fs::path reports_dir(const RunConfig& c) { return c.out_dir / "reports"; }
fs::path backtest_dir(const RunConfig& c) { return c.out_dir / "backtest"; }

std::string model_file_name(int horizon, std::uint64_t seed) {
  return std::string(kBaselineId) + "_k" + std::to_string(horizon) + "_s" + std::to_string(seed) + ".lobm";
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(Errc::IoError, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    fail(Errc::MalformedRow, path.string() + ": " + e.what());
  }
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string iso_date_after(std::string_view start, std::size_t days) {
  int y = 0;
  unsigned m = 0, d = 0;
  std::sscanf(std::string(start).c_str(), "%d-%u-%u", &y, &m, &d);
  using namespace std::chrono;
  const year_month_day ymd{sys_days{year{y} / month{m} / day{d}} + std::chrono::days{static_cast<int>(days)}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string mids_file_name(const std::string& stock, const std::string& date) { return stock + "_" + date + ".csv"; }

}  // namespace

// --- inputs ----------------------------------------------------------------------

std::vector<DayStream> load_days(const RunConfig& config) {
  std::vector<DayStream> days;
  if (config.source == DataSource::Synthetic) {
    const std::size_t n_stocks = config.synthetic_stocks.size();
    days.resize(n_stocks * config.synthetic_days);
    parallel_for(days.size(), config.workers, [&](std::size_t i) {
      const std::size_t s = i / config.synthetic_days;
      const std::size_t d = i % config.synthetic_days;
      SyntheticConfig sc;
      sc.symbol = config.synthetic_stocks[s];
      sc.date = iso_date_after("2024-01-02", d);
      sc.snapshot_levels = config.levels;
      sc.seed_levels = std::max(sc.seed_levels, config.levels);
      const std::uint64_t seed = splitmix64(config.synthetic_seed ^ splitmix64(s * 0x10000 + d));
      days[i] = generate_synthetic(seed, config.synthetic_events, sc);
    });
    return days;
  }
  if (config.source == DataSource::Fi2010) fail(Errc::ConfigError, "FI-2010 files carry no event streams");

  if (!fs::is_directory(config.input)) fail(Errc::IoError, "not a directory: " + config.input.string());
  std::vector<std::pair<fs::path, fs::path>> pairs;
  for (const auto& entry : fs::directory_iterator(config.input)) {
    const std::string name = entry.path().filename().string();
    const auto pos = name.find("_message_");
    if (pos == std::string::npos || entry.path().extension() != ".csv") continue;
    const fs::path book = entry.path().parent_path() / (name.substr(0, pos) + "_orderbook_" + name.substr(pos + 9));
    if (!fs::exists(book)) fail(Errc::IoError, "missing orderbook file for " + name);
    pairs.emplace_back(entry.path(), book);
  }
  if (pairs.empty()) fail(Errc::IoError, "no LOBSTER message files in " + config.input.string());
  std::sort(pairs.begin(), pairs.end());
  days.resize(pairs.size());
  parallel_for(pairs.size(), config.workers,
               [&](std::size_t i) { days[i] = parse_lobster_day(pairs[i].first, pairs[i].second); });
  std::stable_sort(days.begin(), days.end(), [](const DayStream& a, const DayStream& b) {
    return std::tie(a.symbol, a.date) < std::tie(b.symbol, b.date);
  });
  return days;
}

// --- build-dataset ---------------------------------------------------------------

namespace {

json distribution_json(const ClassDistribution& d) {
  json j;
  for (TrendLabel l : kAllLabels) {
    const std::string key(1, label_char(l));
    j["counts"][key] = d.counts[index_of(l)];
    j["shares"][key] = std::round(d.shares[index_of(l)] * 100.0) / 100.0;
  }
  j["total"] = d.total;
  return j;
}

json split_report(const DatasetBundle& bundle) {
  json out;
  for (Split s : kAllSplits) {
    const ObservationSet& set = bundle[s];
    json per_stock;
    for (std::size_t st = 0; st < bundle.meta.stocks.size(); ++st) {
      std::vector<TrendLabel> labels;
      for (std::size_t i = 0; i < set.size(); ++i) {
        if (set.origin(i).stock == st) labels.push_back(set.label(i));
      }
      if (!labels.empty()) per_stock[bundle.meta.stocks[st]] = distribution_json(class_distribution(labels));
    }
    json entry{{"observations", set.size()}, {"stocks", per_stock}};
    if (!set.empty()) entry["all"] = distribution_json(class_distribution(set.labels()));
    out[std::string(split_name(s))] = entry;
  }
  return out;
}

struct StockDays {
  std::string stock;
  std::vector<std::size_t> series;  // indices into the DaySeries list, chronological
  SplitAssignment split;
};

BuildOutput build_fi2010(const RunConfig& config) {
  std::vector<fs::path> train_files, test_files;
  for (const auto& entry : fs::directory_iterator(config.input)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("Train", 0) == 0) train_files.push_back(entry.path());
    if (name.rfind("Test", 0) == 0) test_files.push_back(entry.path());
  }
  std::sort(train_files.begin(), train_files.end());
  std::sort(test_files.begin(), test_files.end());
  if (train_files.size() != 1 || test_files.empty()) {
    fail(Errc::IoError, "expected one Train* file and at least one Test* file in " + config.input.string());
  }
  const Fi2010Set train = parse_fi2010(train_files[0], Fi2010Split::Train);
  std::vector<Fi2010Set> tests(test_files.size());
  parallel_for(test_files.size(), config.workers,
               [&](std::size_t i) { tests[i] = parse_fi2010(test_files[i], Fi2010Split::Test); });

  BuildOutput out;
  json report;
  std::vector<fs::path> written;
  for (int k : config.horizons) {
    const std::size_t hi = static_cast<std::size_t>(
        std::find(kFi2010Horizons.begin(), kFi2010Horizons.end(), k) - kFi2010Horizons.begin());
    DatasetBundle b;
    b.meta.horizon = k;
    b.meta.theta = config.theta;
    b.meta.theta_mode = "shipped";
    b.meta.window = config.window;
    b.meta.stride = config.stride;
    b.meta.levels = static_cast<int>(kFi2010LobRows / 4);
    b.meta.source = "fi2010";
    b.meta.stats_fitted_on = "as shipped";
    b.meta.stocks = {"FI2010"};
    b.meta.days.push_back(train_files[0].stem().string());
    for (const auto& f : test_files) b.meta.days.push_back(f.stem().string());
    b.meta.split_days[0] = {b.meta.days[0]};
    b.meta.split_days[1] = {b.meta.days[0]};
    b.meta.split_days[2].assign(b.meta.days.begin() + 1, b.meta.days.end());

    auto labels_of = [&](const Fi2010Set& s, std::size_t begin, std::size_t end) {
      std::vector<TrendLabel> l;
      for (std::size_t i = begin; i < end; ++i) l.push_back(s.label(i, hi));
      return l;
    };
    auto windows = [&](const Fi2010Set& s, std::size_t begin, std::size_t end, std::uint32_t day) {
      const auto rows = std::span(s.features).subspan(begin * kFi2010LobRows, (end - begin) * kFi2010LobRows);
      const auto labels = labels_of(s, begin, end);
      return make_observations(rows, kFi2010LobRows, labels, config.window, Origin{0, day, begin});
    };
    const std::size_t n_train = static_cast<std::size_t>(
        std::floor(static_cast<double>(train.samples) * (1.0 - config.split.val_fraction)));
    b[Split::Train] = windows(train, 0, n_train, 0);
    b[Split::Val] = windows(train, n_train, train.samples, 0);
    b[Split::Test] = ObservationSet(static_cast<std::size_t>(config.window), kFi2010LobRows);
    for (std::size_t t = 0; t < tests.size(); ++t) {
      b[Split::Test].append(windows(tests[t], 0, tests[t].samples, static_cast<std::uint32_t>(t + 1)),
                            [](const Origin& o) { return o; });
    }
    const fs::path path = datasets_dir(config) / dataset_file_name(k);
    fs::create_directories(path.parent_path());
    write_dataset(b, path);
    out.datasets[k] = path;
    written.push_back(path);
    report[std::to_string(k)] = json{{"theta", config.theta}, {"splits", split_report(b)}};
  }
  out.report = datasets_dir(config) / "build_report.json";
  write_text(out.report, json{{"source", "fi2010"}, {"horizons", report}}.dump(2) + "\n");
  written.push_back(out.report);
  update_manifest(config.out_dir, "build-dataset", written);
  return out;
}

}  // namespace

BuildOutput cmd_build_dataset(const RunConfig& config) {
  config.validate();
  if (config.source == DataSource::Fi2010) return build_fi2010(config);

  const std::vector<DayStream> streams = load_days(config);
  std::vector<DaySeries> series(streams.size());
  parallel_for(streams.size(), config.workers, [&](std::size_t i) {
    try {
      series[i] = build_day_series(streams[i], config.levels, static_cast<std::size_t>(config.stride));
    } catch (const Error& e) {
      throw Error(e.code(), streams[i].symbol + " " + streams[i].date + ": " + e.what());
    }
  });

  std::vector<StockDays> stocks;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (stocks.empty() || stocks.back().stock != series[i].stock) stocks.push_back({series[i].stock, {}, {}});
    stocks.back().series.push_back(i);
  }
  std::set<std::string> all_dates;
  for (auto& st : stocks) {
    std::vector<std::string> dates;
    for (std::size_t i : st.series) dates.push_back(series[i].date);
    st.split = split_by_days(dates, config.split);
    all_dates.insert(dates.begin(), dates.end());
  }

  DatasetMetadata meta;
  meta.theta = config.theta;
  meta.window = config.window;
  meta.stride = config.stride;
  meta.levels = config.levels;
  meta.source = std::string(source_name(config.source));
  meta.days.assign(all_dates.begin(), all_dates.end());
  for (const auto& st : stocks) meta.stocks.push_back(st.stock);
  std::array<std::set<std::string>, 3> split_dates;
  for (const auto& st : stocks) {
    for (Split s : kAllSplits) {
      for (std::size_t d : st.split[s]) split_dates[static_cast<int>(s)].insert(series[st.series[d]].date);
    }
  }
  for (int s = 0; s < 3; ++s) meta.split_days[s].assign(split_dates[s].begin(), split_dates[s].end());

  // Normalization and balanced thresholds only ever see train and val days.
  std::vector<std::span<const LobRecord>> fit_parts;
  std::vector<std::vector<double>> train_mids;
  for (const auto& st : stocks) {
    for (Split s : {Split::Train, Split::Val}) {
      for (std::size_t d : st.split[s]) fit_parts.emplace_back(series[st.series[d]].records);
    }
    for (std::size_t d : st.split[Split::Train]) {
      std::vector<double> m;
      for (const auto& r : series[st.series[d]].records) m.push_back(mid_price(r));
      train_mids.push_back(std::move(m));
    }
  }
  meta.stats = fit_normalization(fit_parts);

  auto day_index = [&](const std::string& date) {
    return static_cast<std::uint32_t>(std::lower_bound(meta.days.begin(), meta.days.end(), date) - meta.days.begin());
  };

  BuildOutput out;
  std::vector<fs::path> written;
  std::vector<json> horizon_reports(config.horizons.size());
  std::vector<DatasetBundle> bundles(config.horizons.size());
  parallel_for(config.horizons.size(), config.workers, [&](std::size_t hi) {
    const int k = config.horizons[hi];
    DatasetBundle& b = bundles[hi];
    b.meta = meta;
    b.meta.horizon = k;
    if (config.balance_theta) {
      std::vector<std::span<const double>> segs(train_mids.begin(), train_mids.end());
      b.meta.theta = balance_threshold(segs, k).theta;
      b.meta.theta_mode = "balanced";
    }
    const LabelParams params{k, b.meta.theta};
    for (Split s : kAllSplits) b[s] = ObservationSet(static_cast<std::size_t>(config.window), 4 * config.levels);
    for (std::size_t st = 0; st < stocks.size(); ++st) {
      for (Split s : kAllSplits) {
        for (std::size_t d : stocks[st].split[s]) {
          const DaySeries& ds = series[stocks[st].series[d]];
          const Origin base{static_cast<std::uint32_t>(st), day_index(ds.date), 0};
          try {
            b[s].append(make_observations(ds.records, *b.meta.stats, config.window, params, base),
                        [](const Origin& o) { return o; });
          } catch (const Error& e) {
            throw Error(e.code(), ds.stock + " " + ds.date + " (k=" + std::to_string(k) + "): " + e.what());
          }
        }
      }
    }
    for (Split s : kAllSplits) {
      if (b[s].empty()) fail(Errc::SeriesTooShort, std::string(split_name(s)) + " split has no observations");
    }
    horizon_reports[hi] = json{{"theta", b.meta.theta}, {"theta_mode", b.meta.theta_mode}, {"splits", split_report(b)}};
  });

  fs::create_directories(datasets_dir(config));
  for (std::size_t hi = 0; hi < config.horizons.size(); ++hi) {
    const fs::path path = datasets_dir(config) / dataset_file_name(config.horizons[hi]);
    write_dataset(bundles[hi], path);
    out.datasets[config.horizons[hi]] = path;
    written.push_back(path);
  }

  // Event-level mids of test days feed the backtest bars.
  for (const auto& st : stocks) {
    for (std::size_t d : st.split[Split::Test]) {
      const DaySeries& ds = series[st.series[d]];
      std::string text;
      for (double m : ds.event_mids) text += fmt("%.17g", m) + "\n";
      const fs::path path = datasets_dir(config) / "mids" / mids_file_name(ds.stock, ds.date);
      write_text(path, text);
      written.push_back(path);
    }
  }

  json report{{"source", meta.source},
              {"stride", config.stride},
              {"window", config.window},
              {"levels", config.levels},
              {"normalization",
               {{"price_mean", meta.stats->price_mean},
                {"price_std", meta.stats->price_std},
                {"volume_mean", meta.stats->volume_mean},
                {"volume_std", meta.stats->volume_std},
                {"fitted_on", meta.stats_fitted_on},
                {"std", meta.std_convention}}},
              {"split_days", {{"train", meta.split_days[0]}, {"val", meta.split_days[1]}, {"test", meta.split_days[2]}}}};
  for (std::size_t hi = 0; hi < config.horizons.size(); ++hi) {
    report["horizons"][std::to_string(config.horizons[hi])] = horizon_reports[hi];
  }
  out.report = datasets_dir(config) / "build_report.json";
  write_text(out.report, report.dump(2) + "\n");
  written.push_back(out.report);
  update_manifest(config.out_dir, "build-dataset", written);
  return out;
}

// --- train / predict ------------------------------------------------------------

namespace {

DatasetBundle load_dataset(const RunConfig& config, int horizon) {
  const fs::path path = datasets_dir(config) / dataset_file_name(horizon);
  if (!fs::exists(path)) fail(Errc::IoError, "missing dataset " + path.string() + " (run build-dataset first)");
  return read_dataset(path);
}

std::string dataset_hash(const RunConfig& config, int horizon) {
  return hex32(file_crc32c(datasets_dir(config) / dataset_file_name(horizon)));
}

}  // namespace

void cmd_train(const RunConfig& config) {
  config.validate();
  std::vector<DatasetBundle> bundles;
  std::vector<std::string> hashes;
  for (int k : config.horizons) {
    bundles.push_back(load_dataset(config, k));
    hashes.push_back(dataset_hash(config, k));
  }
  struct Item {
    std::size_t hi;
    std::uint64_t seed;
  };
  std::vector<Item> items;
  for (std::size_t hi = 0; hi < config.horizons.size(); ++hi) {
    for (std::uint64_t s : config.seeds) items.push_back({hi, s});
  }
  std::vector<std::vector<fs::path>> outputs(items.size());
  fs::create_directories(models_dir(config));
  fs::create_directories(predictions_dir(config));
  std::mutex log_mu;
  parallel_for(items.size(), config.workers, [&](std::size_t i) {
    const auto [hi, seed] = items[i];
    const int k = config.horizons[hi];
    const DatasetBundle& b = bundles[hi];
    MlpConfig mc = MlpConfig::baseline(b[Split::Train].input_dim());
    mc.hidden = config.hidden;
    TrainConfig tc = config.train;
    tc.seed = seed;
    const TrainResult r = train(mc, b, tc);

    const fs::path model_path = models_dir(config) / model_file_name(k, seed);
    write_model(r.model, model_path);
    std::string history = "epoch,train_loss,val_f1\n";
    for (const auto& e : r.history) {
      history += std::to_string(e.epoch) + "," + fmt("%.9g", e.train_loss) + "," + fmt("%.9g", e.val_f1) + "\n";
    }
    const fs::path history_path = models_dir(config) / (model_path.stem().string() + "_history.csv");
    write_text(history_path, history);

    PredictionSet p = predict(r.model, b[Split::Test], kBaselineId, k, seed);
    p.dataset_hash = hashes[hi];
    p.extra["best_epoch"] = std::to_string(r.best_epoch);
    const fs::path pred_path = predictions_dir(config) / prediction_file_name(kBaselineId, k, seed);
    write_predictions(p, pred_path);
    outputs[i] = {model_path, history_path, pred_path};
    std::lock_guard lock(log_mu);
    std::cerr << "trained " << kBaselineId << " k=" << k << " seed=" << seed << " best epoch " << r.best_epoch
              << " val F1 " << fmt("%.4f", r.best_val_f1) << "\n";
  });
  std::vector<fs::path> written;
  for (const auto& o : outputs) written.insert(written.end(), o.begin(), o.end());
  update_manifest(config.out_dir, "train", written);
}

PredictionSet cmd_predict(const fs::path& model_path, const fs::path& dataset_path, std::uint64_t seed,
                          const fs::path& out) {
  const Mlp model = read_model(model_path);
  const DatasetBundle b = read_dataset(dataset_path);
  PredictionSet p = predict(model, b[Split::Test], model_path.stem().string(), b.meta.horizon, seed);
  p.dataset_hash = hex32(file_crc32c(dataset_path));
  if (!out.empty()) {
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_predictions(p, out);
  }
  return p;
}

// --- ensembles and evaluation ------------------------------------------------------

namespace {

struct FoundPrediction {
  std::string model;
  int horizon;
  std::uint64_t seed;
  fs::path path;
};

std::vector<FoundPrediction> scan_predictions(const fs::path& dir) {
  std::vector<FoundPrediction> out;
  if (dir.empty() || !fs::is_directory(dir)) return out;
  static const std::regex pattern(R"(^(.+)_k(\d+)_s(\d+)\.csv$)");
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, pattern)) continue;
    out.push_back({m[1], std::stoi(m[2]), std::stoull(m[3]), entry.path()});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.model, a.horizon, a.seed) < std::tie(b.model, b.horizon, b.seed);
  });
  return out;
}

bool is_ensemble(const std::string& model) { return model == "MAJORITY" || model == "METALOB"; }

void check_against_split(const PredictionSet& p, const ObservationSet& test, const std::string& what) {
  if (p.size() != test.size()) {
    fail(Errc::MisalignedSets, what + ": " + std::to_string(p.size()) + " rows for a test split of " +
                                   std::to_string(test.size()));
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.index[i] != i) fail(Errc::MisalignedSets, what + ": index " + std::to_string(p.index[i]) + " at row " + std::to_string(i));
  }
}

std::string metrics_row(const std::string& model, int k, std::uint64_t seed, const MacroMetrics& m, std::size_t n) {
  return model + "," + std::to_string(k) + "," + std::to_string(seed) + "," + std::to_string(n) + "," +
         fmt("%.6f", m.accuracy) + "," + fmt("%.6f", m.precision) + "," + fmt("%.6f", m.recall) + "," +
         fmt("%.6f", m.f1) + "," + (m.zero_division ? "1" : "0") + "\n";
}

/// Ensemble weights per horizon: each member's F1 on that horizon's labels,
/// or the member's mean over horizons for global weights.
using WeightTable = std::map<std::pair<int, std::uint64_t>, std::vector<double>>;

}  // namespace

void cmd_ensemble(const RunConfig& config, int horizon, const std::vector<fs::path>& prediction_files) {
  if (prediction_files.size() < 2) fail(Errc::ConfigError, "an ensemble needs at least two prediction files");
  const DatasetBundle b = load_dataset(config, horizon);
  std::vector<PredictionSet> sets;
  for (const auto& f : prediction_files) {
    sets.push_back(read_predictions(f));
    check_against_split(sets.back(), b[Split::Test], f.string());
  }
  const auto labels = b[Split::Test].labels();
  const std::uint64_t seed = sets.front().seed;
  EnsembleInput in{sets, f1_weights(sets, labels)};
  PredictionSet maj = majority_vote(in);
  MetalobConfig mc;
  mc.hidden = config.meta_hidden;
  mc.train = config.meta_train;
  mc.train.seed = seed;
  MetalobResult meta = train_metalob(sets, labels, mc);
  const fs::path dir = predictions_dir(config);
  fs::create_directories(dir);
  const fs::path maj_path = dir / prediction_file_name("MAJORITY", horizon, seed);
  const fs::path meta_path = dir / prediction_file_name("METALOB", horizon, seed);
  write_predictions(maj, maj_path);
  write_predictions(meta.test_predictions, meta_path);
  update_manifest(config.out_dir, "ensemble", {maj_path, meta_path});
}

void cmd_evaluate(const RunConfig& config) {
  config.validate();
  std::vector<FoundPrediction> found = scan_predictions(predictions_dir(config));
  for (auto& f : scan_predictions(config.predictions_dir)) found.push_back(f);

  // Model ids known anywhere define what is expected for every (k, seed).
  std::set<std::string> base_models;
  for (const auto& f : found) {
    if (!is_ensemble(f.model)) base_models.insert(f.model);
  }
  std::map<std::tuple<std::string, int, std::uint64_t>, fs::path> by_key;
  for (const auto& f : found) {
    if (!is_ensemble(f.model)) by_key.emplace(std::make_tuple(f.model, f.horizon, f.seed), f.path);
  }

  std::string rows = "model,horizon,seed,samples,accuracy,precision,recall,f1,zero_division\n";
  json records = json::array();
  json missing = json::array();
  std::vector<fs::path> written;
  fs::create_directories(reports_dir(config));
  fs::create_directories(predictions_dir(config));

  struct Cell {
    int k;
    std::uint64_t seed;
    std::vector<std::string> models;
    std::vector<PredictionSet> sets;
  };
  std::vector<Cell> cells;
  std::map<int, DatasetBundle> bundles;
  for (int k : config.horizons) {
    bundles.emplace(k, load_dataset(config, k));
    for (std::uint64_t s : config.seeds) {
      Cell c{k, s, {}, {}};
      for (const auto& m : base_models) {
        const auto it = by_key.find({m, k, s});
        if (it == by_key.end()) {
          missing.push_back(prediction_file_name(m, k, s));
          continue;
        }
        PredictionSet p = read_predictions(it->second);
        check_against_split(p, bundles.at(k)[Split::Test], it->second.string());
        c.models.push_back(m);
        c.sets.push_back(std::move(p));
      }
      cells.push_back(std::move(c));
    }
  }

  // Per-horizon F1 of every base model, for voting weights.
  WeightTable weights;
  std::map<std::string, std::vector<double>> per_model_f1;
  for (const auto& c : cells) {
    const auto labels = bundles.at(c.k)[Split::Test].labels();
    std::vector<double> w;
    for (std::size_t m = 0; m < c.sets.size(); ++m) {
      const MacroMetrics mm = macro_metrics(confusion(c.sets[m], labels));
      w.push_back(mm.f1);
      per_model_f1[c.models[m]].push_back(mm.f1);
    }
    weights[{c.k, c.seed}] = w;
  }

  std::vector<std::string> ensemble_rows(cells.size());
  std::vector<json> ensemble_records(cells.size());
  std::vector<std::vector<fs::path>> ensemble_files(cells.size());
  parallel_for(cells.size(), config.workers, [&](std::size_t ci) {
    const Cell& c = cells[ci];
    const auto labels = bundles.at(c.k)[Split::Test].labels();
    std::string text;
    json recs = json::array();
    for (std::size_t m = 0; m < c.sets.size(); ++m) {
      const MacroMetrics mm = macro_metrics(confusion(c.sets[m], labels));
      text += metrics_row(c.models[m], c.k, c.seed, mm, labels.size());
      recs.push_back({{"model", c.models[m]}, {"horizon", c.k}, {"seed", c.seed}, {"f1", mm.f1},
                      {"accuracy", mm.accuracy}, {"zero_division", mm.zero_division}});
    }
    if (c.sets.size() >= 2) {
      std::vector<double> w = weights.at({c.k, c.seed});
      if (!config.per_horizon_weights) {
        for (std::size_t m = 0; m < w.size(); ++m) {
          const auto& all = per_model_f1.at(c.models[m]);
          double sum = 0;
          for (double v : all) sum += v;
          w[m] = sum / static_cast<double>(all.size());
        }
      }
      PredictionSet maj = majority_vote({c.sets, w});
      maj.extra["weights"] = config.per_horizon_weights ? "per-horizon" : "global";
      const MacroMetrics mm = macro_metrics(confusion(maj, labels));
      text += metrics_row("MAJORITY", c.k, c.seed, mm, labels.size());
      recs.push_back({{"model", "MAJORITY"}, {"horizon", c.k}, {"seed", c.seed}, {"f1", mm.f1},
                      {"accuracy", mm.accuracy}, {"zero_division", mm.zero_division}});

      MetalobConfig mc;
      mc.hidden = config.meta_hidden;
      mc.train = config.meta_train;
      mc.train.seed = c.seed;
      const MetalobResult meta = train_metalob(c.sets, labels, mc);
      text += metrics_row("METALOB", c.k, c.seed, meta.test_metrics, meta.split.test);
      recs.push_back({{"model", "METALOB"}, {"horizon", c.k}, {"seed", c.seed}, {"f1", meta.test_metrics.f1},
                      {"accuracy", meta.test_metrics.accuracy}, {"zero_division", meta.test_metrics.zero_division},
                      {"held_out", meta.split.test}});

      const fs::path maj_path = predictions_dir(config) / prediction_file_name("MAJORITY", c.k, c.seed);
      const fs::path meta_path = predictions_dir(config) / prediction_file_name("METALOB", c.k, c.seed);
      write_predictions(maj, maj_path);
      write_predictions(meta.test_predictions, meta_path);

      const auto agreement = agreement_matrix(c.sets);
      std::string csv = "model";
      for (const auto& m : c.models) csv += "," + m;
      csv += "\n";
      for (std::size_t i = 0; i < agreement.size(); ++i) {
        csv += c.models[i];
        for (double v : agreement[i]) csv += "," + fmt("%.6f", v);
        csv += "\n";
      }
      const fs::path agree_path =
          reports_dir(config) / ("agreement_k" + std::to_string(c.k) + "_s" + std::to_string(c.seed) + ".csv");
      write_text(agree_path, csv);
      ensemble_files[ci] = {maj_path, meta_path, agree_path};
    }
    ensemble_rows[ci] = text;
    ensemble_records[ci] = recs;
  });
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    rows += ensemble_rows[ci];
    for (auto& r : ensemble_records[ci]) records.push_back(r);
    written.insert(written.end(), ensemble_files[ci].begin(), ensemble_files[ci].end());
  }

  const fs::path csv_path = reports_dir(config) / "metrics.csv";
  const fs::path json_path = reports_dir(config) / "metrics.json";
  write_text(csv_path, rows);
  write_text(json_path, json{{"f1_average", "macro (unweighted)"},
                             {"zero_division", "defined as 0 and flagged"},
                             {"majority_tie_break", "S>U>D"},
                             {"majority_weights", config.per_horizon_weights ? "per-horizon" : "global"},
                             {"missing_predictions", missing},
                             {"runs", records}}
                            .dump(2) + "\n");
  for (const auto& m : missing) std::cerr << "missing prediction file: " << m.get<std::string>() << "\n";
  written.push_back(csv_path);
  written.push_back(json_path);
  update_manifest(config.out_dir, "evaluate", written);
  cmd_report(config);
}

// --- report -----------------------------------------------------------------------

namespace {

std::map<std::pair<std::string, int>, double> read_claims(const fs::path& path) {
  std::map<std::pair<std::string, int>, double> claims;
  if (path.empty()) return claims;
  std::istringstream in(read_text(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.rfind("model,", 0) == 0) continue;
    std::istringstream row(line);
    std::string model, k, f1;
    if (!std::getline(row, model, ',') || !std::getline(row, k, ',') || !std::getline(row, f1)) {
      fail(Errc::MalformedRow, path.string() + ":" + std::to_string(line_no));
    }
    try {
      claims[{model, std::stoi(k)}] = std::stod(f1);
    } catch (const std::exception&) {
      fail(Errc::MalformedRow, path.string() + ":" + std::to_string(line_no));
    }
  }
  return claims;
}

}  // namespace

void cmd_report(const RunConfig& config) {
  const json metrics = read_json(reports_dir(config) / "metrics.json");
  const auto claims = read_claims(config.claims);

  // f1 in percentage points per (model, horizon), across seeds.
  std::map<std::string, std::map<int, std::vector<std::pair<std::uint64_t, double>>>> observed;
  for (const auto& r : metrics.at("runs")) {
    observed[r.at("model").get<std::string>()][r.at("horizon").get<int>()].push_back(
        {r.at("seed").get<std::uint64_t>(), 100.0 * r.at("f1").get<double>()});
  }

  struct Row {
    std::string model;
    int k;
    double mean, std;
    std::optional<double> claimed;
    int rank = 0;
  };
  std::vector<Row> rows;
  for (const auto& [model, per_k] : observed) {
    for (const auto& [k, vals] : per_k) {
      double sum = 0, sq = 0;
      for (const auto& [s, f] : vals) sum += f;
      const double mean = sum / static_cast<double>(vals.size());
      for (const auto& [s, f] : vals) sq += (f - mean) * (f - mean);
      Row r{model, k, mean, std::sqrt(sq / static_cast<double>(vals.size())), std::nullopt};
      if (auto it = claims.find({model, k}); it != claims.end()) r.claimed = it->second;
      rows.push_back(r);
    }
  }
  // Competition ranking by mean F1 within each horizon (1 = best).
  for (auto& r : rows) {
    r.rank = 1;
    for (const auto& o : rows) {
      if (o.k == r.k && o.mean > r.mean) ++r.rank;
    }
  }

  std::map<std::string, std::optional<ReliabilityScore>> scores;
  for (const auto& [model, per_k] : observed) {
    ScoreInputs in;
    for (const auto& [k, vals] : per_k) {
      if (auto it = claims.find({model, k}); it != claims.end()) in.claimed.push_back({k, it->second});
      for (const auto& [s, f] : vals) in.observed.push_back({k, s, f});
    }
    scores[model] = in.claimed.empty() ? std::nullopt : std::optional(reliability_score(in));
  }

  std::string csv = "model,horizon,claimed_f1,f1_mean,f1_std,rank,score\n";
  json table = json::array();
  for (const auto& r : rows) {
    const auto& sc = scores.at(r.model);
    csv += r.model + "," + std::to_string(r.k) + "," + (r.claimed ? fmt("%.1f", *r.claimed) : "") + "," +
           fmt("%.1f", r.mean) + "," + fmt("%.1f", r.std) + "," + std::to_string(r.rank) + "," +
           (sc ? fmt("%.1f", sc->score) : "") + "\n";
    json j{{"model", r.model}, {"horizon", r.k}, {"f1_mean", r.mean}, {"f1_std", r.std}, {"rank", r.rank}};
    j["claimed_f1"] = r.claimed ? json(*r.claimed) : json(nullptr);
    j["score"] = sc ? json(sc->score) : json(nullptr);
    table.push_back(j);
  }
  const fs::path csv_path = reports_dir(config) / "table.csv";
  const fs::path json_path = reports_dir(config) / "table.json";
  write_text(csv_path, csv);
  write_text(json_path, json{{"f1_units", "percentage points"},
                             {"score", "100 - (|A| + S) over declared horizons and all seeds"},
                             {"std_convention", "population"},
                             {"rank", "competition ranking by mean F1 within a horizon"},
                             {"rows", table}}
                            .dump(2) + "\n");
  update_manifest(config.out_dir, "report", {csv_path, json_path});
}

// --- backtest ----------------------------------------------------------------------

void cmd_backtest(const RunConfig& config) {
  config.validate();
  if (config.source == DataSource::Fi2010) fail(Errc::ConfigError, "FI-2010 ships no event-level prices to trade on");
  const auto found = scan_predictions(predictions_dir(config));
  if (found.empty()) fail(Errc::IoError, "no predictions under " + predictions_dir(config).string());

  std::map<int, DatasetBundle> bundles;
  for (int k : config.horizons) bundles.emplace(k, load_dataset(config, k));

  // (model, k) -> stock -> returns across seeds
  std::map<std::pair<std::string, int>, std::map<std::string, std::vector<double>>> returns;
  std::vector<fs::path> written;
  std::map<std::string, std::vector<OhlcBar>> bar_cache;
  auto bars_for = [&](const std::string& stock, const std::string& date) -> const std::vector<OhlcBar>& {
    const std::string key = stock + "/" + date;
    auto it = bar_cache.find(key);
    if (it != bar_cache.end()) return it->second;
    std::istringstream in(read_text(datasets_dir(config) / "mids" / mids_file_name(stock, date)));
    std::vector<double> mids;
    for (std::string line; std::getline(in, line);) mids.push_back(std::stod(line));
    return bar_cache.emplace(key, ohlc_aggregate(mids, config.bar_period)).first->second;
  };

  for (const auto& f : found) {
    auto bit = bundles.find(f.horizon);
    if (bit == bundles.end() ||
        std::find(config.seeds.begin(), config.seeds.end(), f.seed) == config.seeds.end()) {
      continue;
    }
    const DatasetBundle& b = bit->second;
    const ObservationSet& test = b[Split::Test];
    const PredictionSet p = read_predictions(f.path);

    // Observation sample t is the record of complete event stride*(t+1)-1,
    // which falls in bar (stride*(t+1)-1) / period. Bars without a prediction hold.
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<TrendLabel>> signals;
    for (std::size_t r = 0; r < p.size(); ++r) {
      if (p.index[r] >= test.size()) fail(Errc::MisalignedSets, f.path.string() + ": index beyond test split");
      const Origin& o = test.origin(p.index[r]);
      const auto& bars = bars_for(b.meta.stocks[o.stock], b.meta.days[o.day]);
      auto& sig = signals[{o.stock, o.day}];
      if (sig.empty()) sig.assign(bars.size(), TrendLabel::Stationary);
      const std::size_t event = static_cast<std::size_t>(b.meta.stride) * (o.sample + 1) - 1;
      const std::size_t bar = event / config.bar_period;
      if (bar < sig.size()) sig[bar] = p.predicted(r);
    }

    for (std::uint32_t st = 0; st < b.meta.stocks.size(); ++st) {
      const std::string& stock = b.meta.stocks[st];
      Micros equity = to_micros(config.strategy.capital);
      const Micros initial = equity;
      std::string log = "date,bar_index,action,fill_price,equity_after\n";
      for (const auto& date : b.meta.split_days[2]) {
        const fs::path mids = datasets_dir(config) / "mids" / mids_file_name(stock, date);
        if (!fs::exists(mids)) continue;
        const auto& bars = bars_for(stock, date);
        const auto day = static_cast<std::uint32_t>(
            std::lower_bound(b.meta.days.begin(), b.meta.days.end(), date) - b.meta.days.begin());
        auto it = signals.find({st, day});
        std::vector<TrendLabel> sig =
            it != signals.end() ? it->second : std::vector<TrendLabel>(bars.size(), TrendLabel::Stationary);
        StrategyConfig sc = config.strategy;
        sc.capital = to_dollars(equity);
        const EquityCurve curve = run_strategy(sig, bars, sc);
        std::istringstream trades(format_trade_log(curve));
        std::string line;
        std::getline(trades, line);
        while (std::getline(trades, line)) log += date + "," + line + "\n";
        equity = curve.final_equity;
      }
      const double ret = 100.0 * static_cast<double>(equity - initial) / static_cast<double>(initial);
      returns[{f.model, f.horizon}][stock].push_back(ret);
      const fs::path log_path = backtest_dir(config) / (f.path.stem().string() + "_" + stock + "_trades.csv");
      write_text(log_path, log);
      written.push_back(log_path);
    }
  }

  std::string csv = "model,horizon,stock,runs,min_return_pct,median_return_pct,max_return_pct\n";
  json j = json::array();
  for (const auto& [key, per_stock] : returns) {
    std::vector<std::pair<std::string, std::vector<double>>> input(per_stock.begin(), per_stock.end());
    for (const auto& r : returns_report(input)) {
      csv += key.first + "," + std::to_string(key.second) + "," + r.stock + "," + std::to_string(r.runs) + "," +
             fmt("%.6f", r.min) + "," + fmt("%.6f", r.median) + "," + fmt("%.6f", r.max) + "\n";
      j.push_back({{"model", key.first}, {"horizon", key.second}, {"stock", r.stock}, {"runs", r.runs},
                   {"min_return_pct", r.min}, {"median_return_pct", r.median}, {"max_return_pct", r.max}});
    }
  }
  const fs::path csv_path = backtest_dir(config) / "returns.csv";
  const fs::path json_path = backtest_dir(config) / "returns.json";
  write_text(csv_path, csv);
  write_text(json_path,
             json{{"capital", config.strategy.capital}, {"shares_per_trade", config.strategy.shares_per_trade},
                  {"bar_period_events", config.bar_period}, {"returns", j}}
                     .dump(2) + "\n");
  written.push_back(csv_path);
  written.push_back(json_path);
  update_manifest(config.out_dir, "backtest", written);
}

// --- latency ------------------------------------------------------------------------

void cmd_latency(const RunConfig& config, int horizon, std::size_t repetitions) {
  const DatasetBundle b = load_dataset(config, horizon);
  const fs::path model_path = models_dir(config) / model_file_name(horizon, config.seeds.front());
  const Mlp model = read_model(model_path);
  const ObservationSet& test = b[Split::Test];
  json j{{"model", model_path.filename().string()}, {"horizon", horizon}, {"repetitions", repetitions}};
  for (std::size_t batch : {std::size_t{1}, std::size_t{64}}) {
    if (test.size() < batch) continue;
    const LatencyStats s = measure_latency(model, test, batch, repetitions);
    j["batch_" + std::to_string(batch)] = {{"median_ms", s.median_ms}, {"p95_ms", s.p95_ms}};
    std::cout << "batch " << batch << ": median " << fmt("%.4f", s.median_ms) << " ms, p95 " << fmt("%.4f", s.p95_ms)
              << " ms per observation\n";
  }
  // Timings vary run to run, so this file stays out of the manifest.
  write_text(config.out_dir / "latency" / ("latency_k" + std::to_string(horizon) + ".json"), j.dump(2) + "\n");
}

void cmd_run_experiment(const RunConfig& config) {
  cmd_build_dataset(config);
  cmd_train(config);
  cmd_evaluate(config);
  if (config.source != DataSource::Fi2010) cmd_backtest(config);
}

// --- manifest ------------------------------------------------------------------------

void update_manifest(const fs::path& out_dir, const std::string& command, const std::vector<fs::path>& files) {
  static std::mutex mu;
  std::lock_guard lock(mu);
  const fs::path path = out_dir / "manifest.json";
  json m = fs::exists(path) ? read_json(path) : json{{"version", 1}, {"files", json::object()}};
  for (const auto& f : files) {
    const std::string rel = fs::relative(f, out_dir).generic_string();
    m["files"][rel] = {{"crc32c", hex32(file_crc32c(f))}, {"bytes", fs::file_size(f)}, {"command", command}};
  }
  write_text(path, m.dump(2) + "\n");
}

}  // namespace lobtrend
