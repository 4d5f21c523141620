#include <doctest.h>

#include <algorithm>

#include "clab/archive.hpp"
#include "clab/emulator.hpp"
#include "clab/scenarios.hpp"
#include "test_util.hpp"

using namespace clab;

namespace {

LinkState make_link(std::int64_t delay_ns, std::optional<std::int64_t> bandwidth_bps,
                    std::int64_t jitter_ns, Rational loss) {
  NetworkRule rule;
  rule.src_layer = "edge";
  rule.dst_layer = "cloud";
  rule.delay_ns = delay_ns;
  rule.jitter_ns = jitter_ns;
  rule.bandwidth_bps = bandwidth_bps;
  rule.loss_rate = loss;
  return LinkState{"edge", "cloud", rule, SplitMix64(hash64(7, "link", "edge", "cloud", 0)),
                   0};
}

Message message_of(std::int64_t size_bits) {
  Message msg;
  msg.id = 1;
  msg.size_bits = size_bits;
  return msg;
}

Emulator make_emulator(const ExperimentSpec& spec, std::int64_t rep = 0) {
  HostPool pool = synthesize_pool(spec);
  return Emulator(spec, resolve_mapping(spec, pool, MapStrategy::round_robin), pool, rep);
}

constexpr const char* kEmptySha256 =
    "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";

}  // namespace

TEST_SUITE("emulator") {

TEST_CASE("identity link delivers instantly") {
  LinkState link = make_link(0, std::nullopt, 0, Rational(0));
  TransitResult r = link_transit(link, message_of(1'000), 123);
  CHECK(r.delivered);
  CHECK(r.arrival_ns == 123);
}

TEST_CASE("serialization plus propagation, exact integers") {
  // 10 ms delay, 1 Mbps, 1,000,000-bit message sent at 0
  LinkState link = make_link(10'000'000, 1'000'000, 0, Rational(0));
  TransitResult r = link_transit(link, message_of(1'000'000), 0);
  CHECK(r.delivered);
  CHECK(r.arrival_ns == 1'010'000'000);
}

TEST_CASE("pipe occupancy serializes back-to-back sends") {
  LinkState link = make_link(10'000'000, 1'000'000, 0, Rational(0));
  TransitResult first = link_transit(link, message_of(1'000'000), 0);
  TransitResult second = link_transit(link, message_of(1'000'000), 0);
  CHECK(first.arrival_ns == 1'010'000'000);
  CHECK(second.arrival_ns == 2'010'000'000);
}

TEST_CASE("loss boundaries") {
  LinkState always = make_link(0, std::nullopt, 0, Rational(1));
  for (int i = 0; i < 20; ++i) CHECK_FALSE(link_transit(always, message_of(8), 0).delivered);

  LinkState never = make_link(0, std::nullopt, 0, Rational(0));
  for (int i = 0; i < 20; ++i) CHECK(link_transit(never, message_of(8), 0).delivered);
}

TEST_CASE("jitter draw is bounded and additive") {
  LinkState link = make_link(1'000, std::nullopt, 500, Rational(0));
  for (int i = 0; i < 200; ++i) {
    TransitResult r = link_transit(link, message_of(8), 0);
    CHECK(r.delivered);
    CHECK(r.arrival_ns >= 1'000);
    CHECK(r.arrival_ns <= 1'500);
  }
}

TEST_CASE("drops consume one draw, jitter only when configured") {
  // two links with the same stream: one lossless/no-jitter, one lossy; the
  // draw schedule keeps their streams aligned per transit
  LinkState a = make_link(0, std::nullopt, 0, Rational(1, 2));
  LinkState b = make_link(0, std::nullopt, 0, Rational(1, 2));
  for (int i = 0; i < 100; ++i) {
    bool da = link_transit(a, message_of(8), 0).delivered;
    bool db = link_transit(b, message_of(8), 0).delivered;
    CHECK(da == db);  // identical streams stay in lock step
  }
}

TEST_CASE("provision: symmetric rule expands to two directed links") {
  ExperimentSpec spec = parse_spec(R"(
name: provision
layers:
  - name: edge
    services:
      - {id: a, kind: sink, quantity: 2}
  - name: cloud
    services:
      - {id: b, kind: sink}
network:
  - {src: edge, dst: cloud, delay: 1ms, symmetric: true}
)");
  Emulator em = make_emulator(spec);
  CHECK(em.instances().size() == 3);
  CHECK(em.link_count() == 2);
}

TEST_CASE("provision rejects unregistered behaviors") {
  ExperimentSpec spec;
  spec.layers.push_back({"edge", {{.id = "x", .kind = "unknown_behavior"}}});
  HostPool pool = synthesize_pool(spec);
  Mapping mapping{{{"x.0", "edge-host"}}};
  CHECK_THROWS_AS(Emulator(spec, mapping, pool, 0), Error);
}

TEST_CASE("zero-cost processing completes at arrival time") {
  ExperimentSpec spec = parse_spec(R"(
name: zero-cost
layers:
  - name: edge
    services:
      - {id: probe, kind: source, cpu_capacity: 10,
         params: {target: out, size_bits: "64", period_ns: 1s, records: "1"}}
      - {id: out, kind: sink, cpu_capacity: 10}
workflow:
  - {name: go, kind: launch}
  - {name: stop, kind: wait_until, args: {sim_time_ns: 5s}}
)");
  Emulator em = make_emulator(spec);
  execute_workflow(em, spec);
  CHECK(em.completed_records() == 1);
  // base_units and per_bit_units default to 0: e2e latency must be 0
  for (const MetricSample& s : em.samples())
    if (s.metric == kMetricE2eLatency) CHECK(s.value == Rational(0));
}

TEST_CASE("service time formula: ceil(units * 1e9 / cpu)") {
  // base_units=1, cpu=10 units/s -> 1e8 ns regardless of size
  ExperimentSpec spec = parse_spec(R"(
name: svc-time
layers:
  - name: edge
    services:
      - {id: probe, kind: source, cpu_capacity: 10,
         params: {target: out, size_bits: "999", period_ns: 1s, records: "1"}}
      - {id: out, kind: sink, cpu_capacity: 10, params: {base_units: "1"}}
workflow:
  - {name: go, kind: launch}
  - {name: stop, kind: wait_until, args: {sim_time_ns: 5s}}
)");
  Emulator em = make_emulator(spec);
  execute_workflow(em, spec);
  REQUIRE(em.completed_records() == 1);
  bool found = false;
  for (const MetricSample& s : em.samples())
    if (s.metric == kMetricE2eLatency) {
      CHECK(s.value == Rational(100'000'000));
      found = true;
    }
  CHECK(found);
}

TEST_CASE("fifo single server: two arrivals, sequential completions") {
  // sink needs 1 s of service per message; both injected at t=0
  ExperimentSpec spec = parse_spec(R"(
name: fifo
layers:
  - name: edge
    services:
      - {id: out, kind: sink, cpu_capacity: 1, params: {base_units: "1"}}
workflow:
  - {name: burst, kind: inject, args: {target: out, records: "2", size_bits: "8"}}
  - {name: stop, kind: wait_until, args: {sim_time_ns: 5s}}
)");
  Emulator em = make_emulator(spec);
  execute_workflow(em, spec);
  std::vector<Rational> latencies;
  for (const MetricSample& s : em.samples())
    if (s.metric == kMetricE2eLatency) latencies.push_back(s.value);
  REQUIRE(latencies.size() == 2);
  CHECK(latencies[0] == Rational(1'000'000'000));
  CHECK(latencies[1] == Rational(2'000'000'000));
  const InstanceRuntime& sink = *em.instances().front();
  CHECK(sink.processed_count == 2);
  CHECK(sink.busy_total(em.now_ns()) == 2'000'000'000);
}

TEST_CASE("host capacity bounds service capacity") {
  // service asks for 1000 units/s but its host only provides 10: the
  // 1-unit sink job must take 1e8 ns, not 1e6
  ExperimentSpec spec = parse_spec(R"(
name: host-bound
layers:
  - name: edge
    services:
      - {id: out, kind: sink, cpu_capacity: 1000, params: {base_units: "1"}}
workflow:
  - {name: burst, kind: inject, args: {target: out, records: "1"}}
  - {name: stop, kind: wait_until, args: {sim_time_ns: 1s}}
)");
  HostPool pool{{{"weak", "edge", 1, Rational(10)}}};
  Emulator em(spec, resolve_mapping(spec, pool, MapStrategy::round_robin), pool, 0);
  execute_workflow(em, spec);
  bool found = false;
  for (const MetricSample& s : em.samples())
    if (s.metric == kMetricE2eLatency) {
      CHECK(s.value == Rational(100'000'000));
      found = true;
    }
  CHECK(found);
}

TEST_CASE("advance on an empty queue digests the empty log") {
  ExperimentSpec spec;
  spec.layers.push_back({"edge", {{.id = "s", .kind = "sink"}}});
  Emulator em = make_emulator(spec);
  CHECK(em.advance(1'000'000) == kEmptySha256);
  CHECK(em.now_ns() == 1'000'000);
}

TEST_CASE("identical runs produce identical digests") {
  ExperimentSpec spec = testutil::three_layer_spec();
  HostPool pool = synthesize_pool(spec);
  Mapping mapping = resolve_mapping(spec, pool, MapStrategy::round_robin);

  auto run_once = [&]() {
    Emulator em(spec, mapping, pool, 0);
    em.set_sample_interval(1'000'000'000);
    execute_workflow(em, spec);
    return em.trace_digest();
  };
  CHECK(run_once() == run_once());
}

TEST_CASE("equal fire times dispatch in scheduling order") {
  ExperimentSpec spec;
  spec.layers.push_back({"edge", {{.id = "s", .kind = "sink"}}});
  Emulator em = make_emulator(spec);
  em.enable_trace_dump(true);
  em.mark_phase("first");
  em.mark_phase("second");
  em.advance(0);
  std::string log = em.trace_text();
  auto first = log.find("first");
  auto second = log.find("second");
  REQUIRE(first != std::string::npos);
  REQUIRE(second != std::string::npos);
  CHECK(first < second);
}

TEST_CASE("conservation: sent = delivered + dropped + in flight") {
  ExperimentSpec spec = parse_spec(R"(
name: conserve
seed: 11
layers:
  - name: edge
    services:
      - {id: cam, kind: source, quantity: 2,
         params: {target: store, size_bits: "50000", period_ns: 100ms, records: "20"}}
  - name: cloud
    services:
      - {id: store, kind: sink}
network:
  - {src: edge, dst: cloud, delay: 20ms, bandwidth: 5Mbps, loss: 0.3, jitter: 1ms}
workflow:
  - {name: go, kind: launch}
  - {name: stop, kind: wait_until, args: {sim_time_ns: 1s}}
)");
  Emulator em = make_emulator(spec);
  execute_workflow(em, spec);
  CHECK(em.messages_sent() ==
        em.messages_delivered() + em.messages_dropped() + em.messages_in_flight());
  CHECK(em.messages_sent() > 0);
  em.drain();
  CHECK(em.messages_in_flight() == 0);
  CHECK(em.messages_sent() == em.messages_delivered() + em.messages_dropped());
}

TEST_CASE("delivered latency is bounded below by the path delay sum") {
  ExperimentSpec spec = testutil::three_layer_spec();
  Emulator em = make_emulator(spec);
  execute_workflow(em, spec);
  REQUIRE(em.completed_records() == 3);
  for (const MetricSample& s : em.samples())
    if (s.metric == kMetricE2eLatency)
      CHECK(s.value >= Rational(3'000'000));  // 1 ms edge->fog + 2 ms fog->cloud
}

TEST_CASE("utilization stays within [0,1] and busy <= elapsed") {
  ExperimentSpec spec = parse_spec(R"(
name: util
layers:
  - name: edge
    services:
      - {id: cam, kind: source,
         params: {target: out, size_bits: "8", period_ns: 200ms, records: "10"}}
      - {id: out, kind: sink, cpu_capacity: 10, params: {base_units: "1"}}
workflow:
  - {name: go, kind: launch}
  - {name: stop, kind: wait_until, args: {sim_time_ns: 3s}}
)");
  Emulator em = make_emulator(spec);
  em.set_sample_interval(500'000'000);
  execute_workflow(em, spec);
  bool saw_busy = false;
  for (const MetricSample& s : em.samples())
    if (s.metric == kMetricCpuUtilization) {
      CHECK(s.value >= Rational(0));
      CHECK(s.value <= Rational(1));
      if (s.value > Rational(0)) saw_busy = true;
    }
  CHECK(saw_busy);
  for (const auto& rt : em.instances()) CHECK(rt->busy_total(em.now_ns()) <= em.now_ns());
}

TEST_CASE("idle deployments sample zero utilization") {
  ExperimentSpec spec = parse_spec(R"(
name: idle-util
layers: [{name: edge, services: [{id: s, kind: sink}]}]
workflow: [{name: stop, kind: wait_until, args: {sim_time_ns: 5s}}]
)");
  Emulator em = make_emulator(spec);
  em.set_sample_interval(1'000'000'000);
  execute_workflow(em, spec);
  std::size_t util_samples = 0;
  for (const MetricSample& s : em.samples())
    if (s.metric == kMetricCpuUtilization) {
      CHECK(s.value == Rational(0));
      ++util_samples;
    }
  CHECK(util_samples == 5);
}

TEST_CASE("a single shipped record yields one e2e sample from the link formula") {
  // 1 Mbps serialization of 1e6 bits + 10 ms propagation = 1.01 s
  ExperimentSpec spec = parse_spec(R"(
name: one-record
layers:
  - name: edge
    services:
      - {id: cam, kind: source,
         params: {target: store, size_bits: "1000000", period_ns: 10s, records: "1"}}
  - name: cloud
    services:
      - {id: store, kind: sink}
network:
  - {src: edge, dst: cloud, delay: 10ms, bandwidth: 1Mbps}
workflow:
  - {name: go, kind: launch}
  - {name: stop, kind: wait_until, args: {sim_time_ns: 5s}}
)");
  Emulator em = make_emulator(spec);
  execute_workflow(em, spec);
  std::vector<Rational> latencies;
  for (const MetricSample& s : em.samples())
    if (s.metric == kMetricE2eLatency) latencies.push_back(s.value);
  REQUIRE(latencies.size() == 1);
  CHECK(latencies[0] == Rational(1'010'000'000));
}

TEST_CASE("throughput is completed records over the horizon") {
  ExperimentSpec spec = parse_spec(R"(
name: throughput
layers:
  - name: edge
    services:
      - {id: cam, kind: source,
         params: {target: store, size_bits: "8", period_ns: 1s, records: "10"}}
      - {id: store, kind: sink}
workflow:
  - {name: go, kind: launch}
  - {name: stop, kind: wait_until, args: {sim_time_ns: 10s}}
)");
  Emulator em = make_emulator(spec);
  execute_workflow(em, spec);
  CHECK(em.completed_records() == 10);
  bool found = false;
  for (const MetricSample& s : em.samples())
    if (s.metric == kMetricThroughput) {
      CHECK(s.value == Rational(1));  // 10 records / 10 s
      found = true;
    }
  CHECK(found);
}

TEST_CASE("advance rejects going backwards") {
  ExperimentSpec spec;
  spec.layers.push_back({"edge", {{.id = "s", .kind = "sink"}}});
  Emulator em = make_emulator(spec);
  em.advance(100);
  CHECK_THROWS_AS(em.advance(50), Error);
}

TEST_CASE("phase errors name unknown services") {
  ExperimentSpec spec = parse_spec(R"(
name: phase-err
layers: [{name: e, services: [{id: ok, kind: sink}]}]
workflow: [{name: boom, kind: inject, args: {target: missing}}]
)");
  Emulator em = make_emulator(spec);
  try {
    execute_workflow(em, spec);
    FAIL("expected PhaseError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::phase);
    CHECK(std::string(e.what()).find("boom") != std::string::npos);
  }
}

}  // TEST_SUITE
