#include "lobtrend/predictions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lobtrend/error.hpp"

namespace lobtrend {

namespace {

constexpr std::string_view kHeader = "index,p_up,p_stationary,p_down";

}  // namespace

std::vector<TrendLabel> PredictionSet::predicted_labels() const {
  std::vector<TrendLabel> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = argmax_label(probs[i]);
  return out;
}

bool is_simplex(const Probabilities& p, double tolerance) {
  double sum = 0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

std::string format_predictions(const PredictionSet& set) {
  if (set.index.size() != set.probs.size()) fail(Errc::InvalidArgument, "index/probability count mismatch");
  std::string out;
  out += "# model=" + set.model_id + "\n";
  out += "# horizon=" + std::to_string(set.horizon) + "\n";
  out += "# seed=" + std::to_string(set.seed) + "\n";
  out += "# dataset_hash=" + set.dataset_hash + "\n";
  for (const auto& [k, v] : set.extra) out += "# " + k + "=" + v + "\n";
  out += kHeader;
  out += '\n';

  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return set.index[a] < set.index[b]; });
  char buf[128];
  for (std::size_t i : order) {
    const auto& p = set.probs[i];
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g\n", set.index[i], p[0], p[1], p[2]);
    out += buf;
  }
  return out;
}

void write_predictions(const PredictionSet& set, const std::filesystem::path& path) {
  const std::string text = format_predictions(set);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(Errc::IoError, "write failed for " + path.string());
}

PredictionSet parse_predictions(std::string_view text) {
  PredictionSet set;
  bool have_model = false, have_horizon = false, have_seed = false, have_header = false;
  std::size_t line_no = 0;
  std::vector<std::pair<std::size_t, Probabilities>> rows;

  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
  };

  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '#') {
      if (have_header) continue;
      std::string_view body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string key(trim(body.substr(0, eq)));
      const std::string value(trim(body.substr(eq + 1)));
      try {
        if (key == "model") {
          set.model_id = value;
          have_model = true;
        } else if (key == "horizon") {
          set.horizon = std::stoi(value);
          have_horizon = true;
        } else if (key == "seed") {
          set.seed = std::stoull(value);
          have_seed = true;
        } else if (key == "dataset_hash") {
          set.dataset_hash = value;
        } else {
          set.extra[key] = value;
        }
      } catch (const std::exception&) {
        fail(Errc::MalformedRow, "line " + std::to_string(line_no) + ": bad value for " + key);
      }
      continue;
    }
    if (!have_header) {
      if (line != kHeader) fail(Errc::MissingHeader, "line " + std::to_string(line_no) + ": expected column header");
      if (!have_model || !have_horizon || !have_seed) {
        fail(Errc::MissingHeader, "model, horizon and seed comments are required before the column header");
      }
      have_header = true;
      continue;
    }

    std::array<std::string_view, 4> f;
    std::size_t pos = 0;
    for (std::size_t c = 0; c < 4; ++c) {
      const std::size_t comma = c < 3 ? line.find(',', pos) : line.size();
      if (comma == std::string_view::npos) fail(Errc::MalformedRow, "line " + std::to_string(line_no));
      f[c] = trim(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    std::size_t idx = 0;
    Probabilities p{};
    auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), idx);
    bool ok = ec == std::errc{} && ptr == f[0].data() + f[0].size();
    for (std::size_t c = 0; c < 3 && ok; ++c) {
      auto r = std::from_chars(f[c + 1].data(), f[c + 1].data() + f[c + 1].size(), p[c]);
      ok = r.ec == std::errc{} && r.ptr == f[c + 1].data() + f[c + 1].size();
    }
    if (!ok) fail(Errc::MalformedRow, "line " + std::to_string(line_no));
    if (!is_simplex(p)) fail(Errc::RowProbabilityInvalid, "line " + std::to_string(line_no) + " is not a simplex");
    rows.emplace_back(idx, p);
  }
  if (!have_header) fail(Errc::MissingHeader, "no column header");

  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) fail(Errc::DuplicateIndex, "index " + std::to_string(rows[i].first));
  }
  set.index.reserve(rows.size());
  set.probs.reserve(rows.size());
  for (const auto& [i, p] : rows) {
    set.index.push_back(i);
    set.probs.push_back(p);
  }
  return set;
}

PredictionSet read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_predictions(ss.str());
}

}  // namespace lobtrend
