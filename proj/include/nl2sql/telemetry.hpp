#pragma once

// Online A/B metrics over telemetry event logs: 4-week-window adoption,
// engagement and failure rates, nearest-rank latency percentiles, and
// treatment/control comparison reports with the "Nx" ratio rendering.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nl2sql/errors.hpp"
#include "nl2sql/eval.hpp"

namespace nl2sql {

enum class EventKind {
  Exposed,
  SuggestionRequested,
  SuggestionServed,
  AggregateCreated,
  AggregateEdited,
  AggregateDeleted,
  ErrorRegistered,
  SuggestionInvalid,
};

inline const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::Exposed: return "Exposed";
    case EventKind::SuggestionRequested: return "SuggestionRequested";
    case EventKind::SuggestionServed: return "SuggestionServed";
    case EventKind::AggregateCreated: return "AggregateCreated";
    case EventKind::AggregateEdited: return "AggregateEdited";
    case EventKind::AggregateDeleted: return "AggregateDeleted";
    case EventKind::ErrorRegistered: return "ErrorRegistered";
    case EventKind::SuggestionInvalid: return "SuggestionInvalid";
  }
  return "?";
}

inline std::optional<EventKind> event_kind_from_name(std::string_view name) {
  for (EventKind k : {EventKind::Exposed, EventKind::SuggestionRequested, EventKind::SuggestionServed,
                      EventKind::AggregateCreated, EventKind::AggregateEdited,
                      EventKind::AggregateDeleted, EventKind::ErrorRegistered,
                      EventKind::SuggestionInvalid}) {
    if (name == event_kind_name(k)) return k;
  }
  return std::nullopt;
}

struct TelemetryEvent {
  EventKind kind = EventKind::Exposed;
  std::string user_id;
  std::string variant;
  std::int64_t timestamp = 0;             // epoch seconds, UTC
  std::optional<double> latency_s;        // present iff kind == SuggestionServed
  std::optional<std::string> aggregate_id;  // correlates created/edited/deleted/error events
};

// The "last four weeks": [window_end - 28 days, window_end], both inclusive.
constexpr std::int64_t kWindowSeconds = 28ll * 86400ll;

namespace detail {

inline bool in_window(const TelemetryEvent& e, const std::string& variant, std::int64_t window_end) {
  return e.variant == variant && e.timestamp >= window_end - kWindowSeconds &&
         e.timestamp <= window_end;
}

}  // namespace detail

// Distinct users who created an aggregate, relative to distinct users
// exposed to the feature; 0 when nobody was exposed.
inline double adoption_rate(const std::vector<TelemetryEvent>& events, const std::string& variant,
                            std::int64_t window_end) {
  std::set<std::string> exposed, creators;
  for (const auto& e : events) {
    if (!detail::in_window(e, variant, window_end)) continue;
    if (e.kind == EventKind::Exposed) exposed.insert(e.user_id);
    if (e.kind == EventKind::AggregateCreated) creators.insert(e.user_id);
  }
  if (exposed.empty()) return 0.0;
  return static_cast<double>(creators.size()) / static_cast<double>(exposed.size());
}

// Created aggregates with no subsequent delete/edit/error for the same
// aggregate id inside the window, relative to all created aggregates.
inline double engagement_rate(const std::vector<TelemetryEvent>& events, const std::string& variant,
                              std::int64_t window_end) {
  std::size_t created = 0, successful = 0;
  for (const auto& e : events) {
    if (!detail::in_window(e, variant, window_end) || e.kind != EventKind::AggregateCreated) continue;
    ++created;
    bool spoiled = false;
    for (const auto& other : events) {
      if (!detail::in_window(other, variant, window_end)) continue;
      if (other.kind != EventKind::AggregateDeleted && other.kind != EventKind::AggregateEdited &&
          other.kind != EventKind::ErrorRegistered) {
        continue;
      }
      if (other.aggregate_id && e.aggregate_id && *other.aggregate_id == *e.aggregate_id &&
          other.timestamp >= e.timestamp) {
        spoiled = true;
        break;
      }
    }
    if (!spoiled) ++successful;
  }
  if (created == 0) return 0.0;
  return static_cast<double>(successful) / static_cast<double>(created);
}

// Invalid suggestions relative to served suggestions; 0 when none served.
inline double failure_rate(const std::vector<TelemetryEvent>& events, const std::string& variant,
                           std::int64_t window_end) {
  std::size_t served = 0, invalid = 0;
  for (const auto& e : events) {
    if (!detail::in_window(e, variant, window_end)) continue;
    if (e.kind == EventKind::SuggestionServed) ++served;
    if (e.kind == EventKind::SuggestionInvalid) ++invalid;
  }
  if (served == 0) return 0.0;
  return static_cast<double>(invalid) / static_cast<double>(served);
}

struct LatencyPercentiles {
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
};

inline LatencyPercentiles latency_percentiles(const std::vector<TelemetryEvent>& events,
                                              const std::string& variant, std::int64_t window_end) {
  std::vector<double> samples;
  for (const auto& e : events) {
    if (detail::in_window(e, variant, window_end) && e.kind == EventKind::SuggestionServed &&
        e.latency_s) {
      samples.push_back(*e.latency_s);
    }
  }
  if (samples.empty()) {
    throw NoSamplesError("no SuggestionServed events with latency in the window for variant '" +
                         variant + "'");
  }
  LatencyPercentiles out;
  out.p50 = nearest_rank_percentile(samples, 50.0);
  out.p90 = nearest_rank_percentile(samples, 90.0);
  out.p99 = nearest_rank_percentile(samples, 99.0);
  return out;
}

// Ratio rounded half-away-from-zero to one decimal, rendered like "1.8x".
inline std::string render_ratio(double ratio) {
  double scaled = ratio * 10.0;
  double rounded = std::floor(std::abs(scaled) + 0.5);
  if (scaled < 0) rounded = -rounded;
  double value = rounded / 10.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1fx", value);
  return std::string(buf);
}

struct VariantMetrics {
  double adoption = 0.0;
  double engagement = 0.0;
  double failure = 0.0;
  double latency_median = 0.0;
  double latency_p99 = 0.0;
};

struct MetricRatio {
  double value = 0.0;
  std::string rendered;  // "1.8x"
};

struct AbReport {
  std::string control_variant;
  std::string treatment_variant;
  VariantMetrics control;
  VariantMetrics treatment;
  // present when the control metric is > 0
  std::optional<MetricRatio> adoption_ratio;
  std::optional<MetricRatio> engagement_ratio;
  std::optional<MetricRatio> failure_ratio;
  std::optional<MetricRatio> latency_median_ratio;
  std::optional<MetricRatio> latency_p99_ratio;
};

inline AbReport ab_report(const std::vector<TelemetryEvent>& events, const std::string& control,
                          const std::string& treatment, std::int64_t window_end) {
  bool control_seen = false, treatment_seen = false;
  for (const auto& e : events) {
    if (e.variant == control) control_seen = true;
    if (e.variant == treatment) treatment_seen = true;
  }
  if (!control_seen) throw UnknownVariantError("no events for control variant '" + control + "'");
  if (!treatment_seen) throw UnknownVariantError("no events for treatment variant '" + treatment + "'");

  auto metrics_for = [&events, window_end](const std::string& variant) {
    VariantMetrics m;
    m.adoption = adoption_rate(events, variant, window_end);
    m.engagement = engagement_rate(events, variant, window_end);
    m.failure = failure_rate(events, variant, window_end);
    LatencyPercentiles lat = latency_percentiles(events, variant, window_end);
    m.latency_median = lat.p50;
    m.latency_p99 = lat.p99;
    return m;
  };

  AbReport report;
  report.control_variant = control;
  report.treatment_variant = treatment;
  report.control = metrics_for(control);
  report.treatment = metrics_for(treatment);

  auto ratio = [](double treatment_value, double control_value) -> std::optional<MetricRatio> {
    if (control_value <= 0.0) return std::nullopt;
    double value = treatment_value / control_value;
    return MetricRatio{value, render_ratio(value)};
  };
  report.adoption_ratio = ratio(report.treatment.adoption, report.control.adoption);
  report.engagement_ratio = ratio(report.treatment.engagement, report.control.engagement);
  report.failure_ratio = ratio(report.treatment.failure, report.control.failure);
  report.latency_median_ratio = ratio(report.treatment.latency_median, report.control.latency_median);
  report.latency_p99_ratio = ratio(report.treatment.latency_p99, report.control.latency_p99);
  return report;
}

}  // namespace nl2sql
