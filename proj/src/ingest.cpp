#include "lobtrend/ingest.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lobtrend/error.hpp"

namespace lobtrend {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

/// Splits into lines, dropping a trailing '\r' and a final empty line.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(sep, start);
    if (end == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

[[noreturn]] void malformed(const std::filesystem::path& path, std::size_t line, const std::string& why) {
  fail(Errc::MalformedRow, path.filename().string() + ":" + std::to_string(line) + ": " + why);
}

}  // namespace

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  std::size_t dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::int64_t seconds = 0;
  if (!parse_number(whole, seconds) || seconds < 0) return std::nullopt;
  std::int64_t frac_ns = 0;
  if (dot != std::string_view::npos) {
    std::string_view frac = text.substr(dot + 1);
    if (frac.empty()) return std::nullopt;
    for (char c : frac) {
      if (c < '0' || c > '9') return std::nullopt;
    }
    if (frac.size() > 9) frac = frac.substr(0, 9);  // sub-ns digits dropped
    std::int64_t digits = 0;
    parse_number(frac, digits);
    for (std::size_t i = frac.size(); i < 9; ++i) digits *= 10;
    frac_ns = digits;
  }
  return seconds * 1'000'000'000LL + frac_ns;
}

std::string format_timestamp(std::int64_t ns) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%lld.%09lld", static_cast<long long>(ns / 1'000'000'000LL),
                static_cast<long long>(ns % 1'000'000'000LL));
  return buf;
}

DayStream parse_lobster_day(const std::filesystem::path& message_path,
                            const std::filesystem::path& orderbook_path) {
  const std::string messages = read_file(message_path);
  const std::string book = read_file(orderbook_path);
  auto msg_lines = split_lines(messages);
  auto book_lines = split_lines(book);
  if (msg_lines.size() != book_lines.size()) {
    fail(Errc::RowCountMismatch, std::to_string(msg_lines.size()) + " message rows vs " +
                                     std::to_string(book_lines.size()) + " orderbook rows");
  }

  DayStream day;
  // LOBSTER naming: TICKER_YYYY-MM-DD_start_end_message_L.csv
  const std::string stem = message_path.stem().string();
  auto parts = split_fields(stem, '_');
  if (parts.size() >= 2) {
    day.symbol = std::string(parts[0]);
    day.date = std::string(parts[1]);
  } else {
    day.symbol = stem;
  }

  std::int64_t last_ts = -1;
  int levels = -1;
  for (std::size_t i = 0; i < msg_lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    auto f = split_fields(msg_lines[i], ',');
    if (f.size() < 6) malformed(message_path, line_no, "expected 6 columns");
    auto ts = parse_timestamp(f[0]);
    if (!ts) malformed(message_path, line_no, "bad timestamp");
    if (*ts < last_ts) {
      fail(Errc::NonMonotonicTimestamp, message_path.filename().string() + ":" + std::to_string(line_no));
    }
    last_ts = *ts;
    int type = 0;
    std::int64_t id = 0, size = 0, price = 0;
    int direction = 0;
    if (!parse_number(f[1], type) || !parse_number(f[2], id) || !parse_number(f[3], size) ||
        !parse_number(f[4], price) || !parse_number(f[5], direction)) {
      malformed(message_path, line_no, "non-numeric field");
    }
    if (direction != 1 && direction != -1) malformed(message_path, line_no, "direction must be +1 or -1");
    if (type < 1 || type > 7) malformed(message_path, line_no, "unknown event type");

    EventKind kind;
    switch (type) {
      case 1: kind = EventKind::Submission; break;
      case 2:
      case 3: kind = EventKind::Deletion; break;
      case 4: kind = EventKind::Execution; break;
      default: continue;  // 5 hidden execution, 6 cross, 7 halt
    }
    if (size <= 0 || price <= 0) malformed(message_path, line_no, "size and price must be positive");

    auto cols = split_fields(book_lines[i], ',');
    if (levels < 0) {
      if (cols.size() % 4 != 0 || cols.empty()) malformed(orderbook_path, line_no, "column count not a multiple of 4");
      levels = static_cast<int>(cols.size() / 4);
    }
    if (cols.size() != 4 * static_cast<std::size_t>(levels)) {
      malformed(orderbook_path, line_no, "inconsistent column count");
    }
    LobRecord snap;
    snap.t = day.events.size();
    snap.levels = levels;
    snap.features.resize(cols.size());
    snap.complete = true;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (!parse_number(cols[c], snap.features[c])) malformed(orderbook_path, line_no, "non-numeric field");
      if (c % 2 == 1 && snap.features[c] == 0) snap.complete = false;
    }

    day.events.push_back(LobEvent{*ts, kind, id, size, price, direction == 1 ? Side::Bid : Side::Ask});
    day.source_rows.push_back(line_no);
    day.vendor_snapshots.push_back(std::move(snap));
  }
  return day;
}

void write_lobster_day(const DayStream& day, const std::filesystem::path& message_path,
                       const std::filesystem::path& orderbook_path) {
  if (day.vendor_snapshots.size() != day.events.size()) {
    fail(Errc::InvalidArgument, "vendor snapshots required to write a LOBSTER pair");
  }
  std::ofstream msg(message_path, std::ios::binary);
  std::ofstream ob(orderbook_path, std::ios::binary);
  if (!msg || !ob) fail(Errc::IoError, "cannot write " + message_path.string());
  for (std::size_t i = 0; i < day.events.size(); ++i) {
    const LobEvent& e = day.events[i];
    int type = 1;
    if (e.kind == EventKind::Deletion) type = 3;
    if (e.kind == EventKind::Execution) type = 4;
    msg << format_timestamp(e.timestamp_ns) << ',' << type << ',' << e.order_id << ',' << e.size << ','
        << e.price << ',' << (e.side == Side::Bid ? 1 : -1) << '\n';
    const auto& f = day.vendor_snapshots[i].features;
    for (std::size_t c = 0; c < f.size(); ++c) {
      if (c) ob << ',';
      ob << f[c];
    }
    ob << '\n';
  }
}

Fi2010Set parse_fi2010(const std::filesystem::path& path, Fi2010Split split) {
  const std::string text = read_file(path);
  auto lines = split_lines(text);
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string_view::npos) lines.pop_back();
  if (lines.size() != kFi2010Rows) {
    fail(Errc::UnexpectedRowCount, path.filename().string() + ": " + std::to_string(lines.size()) + " rows, expected " +
                                       std::to_string(kFi2010Rows));
  }

  auto tokens = [](std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ',')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != ',') ++j;
      if (j > i) out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  };

  Fi2010Set set;
  set.split = split;
  const std::size_t n = tokens(lines[0]).size();
  set.samples = n;
  set.features.resize(n * kFi2010LobRows);
  set.labels.resize(n * kFi2010LabelRows);
  for (std::size_t r = 0; r < kFi2010Rows; ++r) {
    const bool lob = r < kFi2010LobRows;
    const bool label = r >= kFi2010Rows - kFi2010LabelRows;
    if (!lob && !label) continue;
    auto tok = tokens(lines[r]);
    if (tok.size() != n) malformed(path, r + 1, std::to_string(tok.size()) + " columns, expected " + std::to_string(n));
    for (std::size_t c = 0; c < n; ++c) {
      double v = 0;
      if (!parse_number(tok[c], v)) malformed(path, r + 1, "non-numeric value");
      if (lob) {
        set.features[c * kFi2010LobRows + r] = v;
      } else {
        const std::size_t h = r - (kFi2010Rows - kFi2010LabelRows);
        if (v != 1.0 && v != 2.0 && v != 3.0) {
          fail(Errc::LabelOutOfRange, path.filename().string() + ":" + std::to_string(r + 1) + " column " +
                                          std::to_string(c + 1));
        }
        // 1 = up, 2 = stationary, 3 = down
        set.labels[c * kFi2010LabelRows + h] = static_cast<TrendLabel>(static_cast<int>(v) - 1);
      }
    }
  }
  return set;
}

void write_fi2010(const Fi2010Set& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  char buf[40];
  for (std::size_t r = 0; r < kFi2010Rows; ++r) {
    for (std::size_t c = 0; c < set.samples; ++c) {
      if (c) out << ' ';
      if (r < kFi2010LobRows) {
        std::snprintf(buf, sizeof buf, "%.17g", set.features[c * kFi2010LobRows + r]);
        out << buf;
      } else if (r >= kFi2010Rows - kFi2010LabelRows) {
        out << index_of(set.labels[c * kFi2010LabelRows + (r - (kFi2010Rows - kFi2010LabelRows))]) + 1;
      } else {
        out << '0';
      }
    }
    out << '\n';
  }
}

}  // namespace lobtrend
