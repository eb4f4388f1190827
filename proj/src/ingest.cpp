#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "pdphase/error.hpp"
#include "pdphase/spectral.hpp"

namespace pdphase {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos
                                                                        : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_numbers; // 1-based file line
};

Table read_table(std::istream& in) {
  Table table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto cells = split_row(line);
    if (table.header.empty()) {
      for (auto& c : cells) c = lower(c);
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size())
      throw ParseError("row " + std::to_string(line_no) + ": expected " +
                           std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       line_no);
    table.rows.push_back(std::move(cells));
    table.row_numbers.push_back(line_no);
  }
  if (table.header.empty()) throw ParseError("empty CSV: no header row");
  return table;
}

std::optional<std::size_t> column(const Table& t, const std::string& name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - t.header.begin());
}

Count parse_count(const std::string& s, std::size_t row, const char* what) {
  Count v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw ParseError("row " + std::to_string(row) + ": " + what + " '" + s +
                         "' is not an integer",
                     row);
  return v;
}

double parse_real(const std::string& s, std::size_t row, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v))
    throw ParseError("row " + std::to_string(row) + ": " + what + " '" + s + "' is not a number",
                     row);
  return v;
}

bool is_month_label(const std::string& s) {
  return s.size() == 7 && s[4] == '-' &&
         std::all_of(s.begin(), s.begin() + 4, [](unsigned char c) { return std::isdigit(c); }) &&
         std::isdigit(static_cast<unsigned char>(s[5])) &&
         std::isdigit(static_cast<unsigned char>(s[6]));
}

PeriodUnit infer_unit(const std::vector<std::string>& labels) {
  const bool monthly = !labels.empty() && std::all_of(labels.begin(), labels.end(), is_month_label);
  return monthly ? PeriodUnit::Month : PeriodUnit::Year;
}

void check_labels(const Table& t, const std::vector<std::string>& labels) {
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (!label_less(labels[i - 1], labels[i]))
      throw ValidationError("row " + std::to_string(t.row_numbers[i]) + ": label '" + labels[i] +
                                "' does not follow '" + labels[i - 1] + "'",
                            t.row_numbers[i]);
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

} // namespace

DefaultHistory read_history_csv(std::istream& in) {
  const auto table = read_table(in);
  const auto label_col = column(table, "label");
  const auto n_col = column(table, "n");
  const auto k_col = column(table, "k");
  const auto rate_col = column(table, "rate");
  if (!label_col || !n_col || (!k_col && !rate_col))
    throw ParseError("history CSV header must be label,n,k or label,n,rate", 1);

  std::vector<Period> periods;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const std::size_t row = table.row_numbers[i];
    Period p;
    p.label = r[*label_col];
    p.n = parse_count(r[*n_col], row, "n");
    if (p.n < 1) throw ValidationError("row " + std::to_string(row) + ": n must be >= 1", row);
    if (k_col) {
      p.k = parse_count(r[*k_col], row, "k");
      if (p.k < 0 || p.k > p.n)
        throw ValidationError("row " + std::to_string(row) + ": k = " + std::to_string(p.k) +
                                  " outside [0, n = " + std::to_string(p.n) + "]",
                              row);
    } else {
      const double rate = parse_real(r[*rate_col], row, "rate");
      if (!(rate >= 0.0 && rate <= 1.0))
        throw ValidationError("row " + std::to_string(row) + ": rate outside [0, 1]", row);
      p.k = count_from_rate(rate, p.n);
    }
    labels.push_back(p.label);
    periods.push_back(std::move(p));
  }
  if (periods.empty()) throw ParseError("history CSV has no data rows");
  check_labels(table, labels);
  return DefaultHistory(std::move(periods), infer_unit(labels));
}

DefaultHistory ingest_history_csv(const std::string& path) {
  auto in = open(path);
  return read_history_csv(in);
}

RateSeries read_rate_csv(std::istream& in) {
  const auto table = read_table(in);
  const auto label_col = column(table, "label");
  const auto n_col = column(table, "n");
  const auto k_col = column(table, "k");
  const auto rate_col = column(table, "rate");
  if (!label_col || (!rate_col && !(n_col && k_col)))
    throw ParseError("rate CSV header must be label,rate or label,n,k", 1);

  RateSeries series;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const std::size_t row = table.row_numbers[i];
    double rate = 0.0;
    if (rate_col) {
      rate = parse_real(r[*rate_col], row, "rate");
    } else {
      const Count n = parse_count(r[*n_col], row, "n");
      const Count k = parse_count(r[*k_col], row, "k");
      if (n < 1 || k < 0 || k > n)
        throw ValidationError("row " + std::to_string(row) + ": need 0 <= k <= n, n >= 1", row);
      rate = static_cast<double>(k) / static_cast<double>(n);
    }
    if (!(rate >= 0.0 && rate <= 1.0))
      throw ValidationError("row " + std::to_string(row) + ": rate outside [0, 1]", row);
    series.labels.push_back(r[*label_col]);
    series.rates.push_back(rate);
  }
  if (series.rates.empty()) throw ParseError("rate CSV has no data rows");
  check_labels(table, series.labels);
  series.unit = infer_unit(series.labels);
  return series;
}

RateSeries ingest_rate_csv(const std::string& path) {
  auto in = open(path);
  return read_rate_csv(in);
}

} // namespace pdphase
