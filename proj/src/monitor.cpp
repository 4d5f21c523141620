#include "clab/monitor.hpp"

#include <algorithm>
#include <ostream>

#include "clab/errors.hpp"

namespace clab {

bool is_registered_metric(std::string_view name) {
  return name == kMetricQueueLength || name == kMetricCpuUtilization ||
         name == kMetricE2eLatency || name == kMetricThroughput ||
         name == kMetricDropped;
}

std::vector<std::string> registered_metrics() {
  return {kMetricQueueLength, kMetricCpuUtilization, kMetricE2eLatency,
          kMetricThroughput, kMetricDropped};
}

MetricSummary summarize(std::span<const MetricSample> samples, std::string_view metric) {
  std::vector<Rational> values;
  for (const MetricSample& s : samples)
    if (s.metric == metric) values.push_back(s.value);
  if (values.empty())
    raise(Errc::no_samples, "no samples for metric '" + std::string(metric) + "'");

  std::sort(values.begin(), values.end());
  auto nearest_rank = [&](int p) {
    // 1-based index ceil(p/100 * n)
    std::int64_t n = static_cast<std::int64_t>(values.size());
    std::int64_t idx = (p * n + 99) / 100;
    return values[static_cast<std::size_t>(idx - 1)];
  };

  MetricSummary out;
  out.metric = std::string(metric);
  out.count = static_cast<std::int64_t>(values.size());
  out.min = values.front();
  out.max = values.back();
  Rational sum(0);
  for (const Rational& v : values) sum += v;
  out.mean = sum / Rational(out.count);
  out.p50 = nearest_rank(50);
  out.p95 = nearest_rank(95);
  out.p99 = nearest_rank(99);
  return out;
}

std::vector<std::string> metrics_present(std::span<const MetricSample> samples) {
  std::vector<std::string> out;
  for (const MetricSample& s : samples)
    if (std::find(out.begin(), out.end(), s.metric) == out.end()) out.push_back(s.metric);
  return out;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricSample> samples) {
  out << "t_ns,source,metric,value\n";
  for (const MetricSample& s : samples)
    out << s.t_ns << ',' << s.source << ',' << s.metric << ',' << s.value.decimal_str()
        << '\n';
}

}  // namespace clab
