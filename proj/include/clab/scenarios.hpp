#ifndef CLAB_SCENARIOS_HPP
#define CLAB_SCENARIOS_HPP

#include <string_view>

#include "clab/spec.hpp"

namespace clab {

enum class Preset { cloud_centric, hybrid, quadratic };

Preset parse_preset(std::string_view name);  // Errc::unknown_preset
const char* preset_name(Preset preset);

/// Knobs of the synthetic edge->cloud pipeline. Defaults give the hybrid
/// path a wide latency advantage over the cloud-centric one.
struct ScenarioParams {
  std::int64_t n_records = 100;
  std::int64_t record_bits = 1'000'000;          // S
  std::int64_t bandwidth_bps = 1'000'000;        // edge->cloud
  std::int64_t delay_ns = 50'000'000;            // 50 ms one-way
  std::int64_t period_ns = 5'000'000'000;        // record inter-arrival
  Rational size_multiplier = Rational(1, 10);    // f, hybrid only
  Rational preprocess_units = Rational(20);      // hybrid edge transform
  Rational edge_cpu = Rational(1000);            // service-units per second
  Rational cloud_service_units = Rational(0);
  Rational cloud_cpu = Rational(1000);
};

/// cloud_centric: edge sources ship raw records straight to a cloud sink.
/// hybrid: an edge transform shrinks each record to f*S bits first.
/// quadratic: single-layer optimizer benchmark over params a, b.
ExperimentSpec build_scenario(Preset preset, const ScenarioParams& params = {});

/// Closed-form single-record latency (queues empty):
///   cloud_centric = ceil(S*1e9/bw) + delay + ceil(cloud_units*1e9/cloud_cpu)
///   hybrid adds ceil(preprocess*1e9/edge_cpu) and ships f*S bits instead.
std::int64_t analytic_latency(Preset preset, const ScenarioParams& params = {});

}  // namespace clab

#endif  // CLAB_SCENARIOS_HPP
