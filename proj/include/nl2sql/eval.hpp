#pragma once

// Offline evaluation: exact match, per-template aggregation of TED /
// exact-match / execution-match with micro (instance-weighted) and macro
// (template-weighted) averages, and nearest-rank latency percentiles.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nl2sql/ast.hpp"
#include "nl2sql/errors.hpp"
#include "nl2sql/exec.hpp"
#include "nl2sql/serialize.hpp"
#include "nl2sql/ted.hpp"
#include "nl2sql/templates.hpp"

namespace nl2sql {

inline bool exact_match(const SqlAst& gold, const SqlAst& pred) {
  return serialize(gold) == serialize(pred);
}

// Nearest-rank percentile: the value at rank ceil(p/100 * N) of the sorted
// sample (1-based). p in (0, 100].
inline double nearest_rank_percentile(std::vector<double> values, double p) {
  if (values.empty()) throw EmptyInputError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  double raw = p / 100.0 * static_cast<double>(values.size());
  std::size_t rank = static_cast<std::size_t>(raw);
  if (static_cast<double>(rank) < raw) ++rank;  // ceil
  if (rank < 1) rank = 1;
  if (rank > values.size()) rank = values.size();
  return values[rank - 1];
}

struct EvalRow {
  SqlAst gold;
  SqlAst pred;
  double latency_s = 0.0;
};

struct TemplateStats {
  std::string template_text;
  std::size_t count = 0;
  double mean_ted = 0.0;
  double exact_match_rate = 0.0;
  std::optional<double> execution_match_rate;
};

struct Averages {
  double mean_ted = 0.0;
  double exact_match_rate = 0.0;
  std::optional<double> execution_match_rate;
};

struct EvalReport {
  std::vector<TemplateStats> templates;  // sorted by template text
  Averages micro;                        // instance-weighted
  Averages macro;                        // template-weighted
  double latency_p50 = 0.0;
  double latency_p90 = 0.0;
  double latency_p99 = 0.0;
};

// Groups rows by the gold query's template and aggregates. When a database
// is supplied, execution match rates are included.
inline EvalReport aggregate_report(const std::vector<EvalRow>& rows, const CostConfig& costs,
                                   const Database* db = nullptr) {
  if (rows.empty()) throw EmptyInputError("aggregate_report requires at least one row");

  struct Bucket {
    std::size_t count = 0;
    double ted_sum = 0.0;
    std::size_t exact = 0;
    std::size_t exec = 0;
  };
  std::map<std::string, Bucket> buckets;
  std::vector<double> latencies;
  latencies.reserve(rows.size());

  for (const auto& row : rows) {
    Bucket& b = buckets[extract_template(row.gold).text];
    b.count += 1;
    b.ted_sum += ted(row.gold, row.pred, costs);
    if (exact_match(row.gold, row.pred)) b.exact += 1;
    if (db != nullptr && execution_match(row.gold, row.pred, *db)) b.exec += 1;
    latencies.push_back(row.latency_s);
  }

  EvalReport report;
  double micro_ted = 0.0, micro_exact = 0.0, micro_exec = 0.0;
  double macro_ted = 0.0, macro_exact = 0.0, macro_exec = 0.0;
  std::size_t total = 0;
  for (const auto& [text, b] : buckets) {
    TemplateStats stats;
    stats.template_text = text;
    stats.count = b.count;
    stats.mean_ted = b.ted_sum / static_cast<double>(b.count);
    stats.exact_match_rate = static_cast<double>(b.exact) / static_cast<double>(b.count);
    if (db != nullptr) {
      stats.execution_match_rate = static_cast<double>(b.exec) / static_cast<double>(b.count);
    }
    micro_ted += b.ted_sum;
    micro_exact += static_cast<double>(b.exact);
    micro_exec += static_cast<double>(b.exec);
    macro_ted += stats.mean_ted;
    macro_exact += stats.exact_match_rate;
    if (stats.execution_match_rate) macro_exec += *stats.execution_match_rate;
    total += b.count;
    report.templates.push_back(std::move(stats));
  }
  const double n = static_cast<double>(total);
  const double k = static_cast<double>(buckets.size());
  report.micro.mean_ted = micro_ted / n;
  report.micro.exact_match_rate = micro_exact / n;
  report.macro.mean_ted = macro_ted / k;
  report.macro.exact_match_rate = macro_exact / k;
  if (db != nullptr) {
    report.micro.execution_match_rate = micro_exec / n;
    report.macro.execution_match_rate = macro_exec / k;
  }
  report.latency_p50 = nearest_rank_percentile(latencies, 50.0);
  report.latency_p90 = nearest_rank_percentile(latencies, 90.0);
  report.latency_p99 = nearest_rank_percentile(latencies, 99.0);
  return report;
}

}  // namespace nl2sql
