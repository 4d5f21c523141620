#ifndef CLAB_MONITOR_HPP
#define CLAB_MONITOR_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clab/rational.hpp"

namespace clab {

struct MetricSample {
  std::int64_t t_ns = 0;
  std::string source;  // instance id or "global"
  std::string metric;
  Rational value;

  bool operator==(const MetricSample&) const = default;
};

struct MetricSummary {
  std::string metric;
  std::int64_t count = 0;
  Rational min, max, mean;
  Rational p50, p95, p99;  // nearest-rank

  bool operator==(const MetricSummary&) const = default;
};

inline constexpr const char* kMetricQueueLength = "queue_length";
inline constexpr const char* kMetricCpuUtilization = "cpu_utilization";
inline constexpr const char* kMetricE2eLatency = "e2e_latency_ns";
inline constexpr const char* kMetricThroughput = "throughput_rps";
inline constexpr const char* kMetricDropped = "messages_dropped";

bool is_registered_metric(std::string_view name);
std::vector<std::string> registered_metrics();

/// Nearest-rank summary: the p-th percentile is the sorted sample at
/// 1-based index ceil(p/100 * n); the mean is exact. Throws
/// Errc::no_samples when no sample carries the metric.
MetricSummary summarize(std::span<const MetricSample> samples, std::string_view metric);

/// All metric names present, in first-appearance order.
std::vector<std::string> metrics_present(std::span<const MetricSample> samples);

/// CSV: header `t_ns,source,metric,value`, rationals rendered as decimals
/// with up to 9 fractional digits, round-half-even.
void write_metrics_csv(std::ostream& out, std::span<const MetricSample> samples);

}  // namespace clab

#endif  // CLAB_MONITOR_HPP
