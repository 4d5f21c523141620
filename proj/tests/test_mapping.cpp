#include <doctest.h>

#include <algorithm>
#include <map>

#include "clab/mapping.hpp"
#include "clab/rng.hpp"
#include "test_util.hpp"

using namespace clab;

namespace {

ExperimentSpec qty_spec(std::int64_t quantity) {
  ExperimentSpec spec;
  Layer edge;
  edge.name = "edge";
  edge.services.push_back({.id = "s", .kind = "sink", .quantity = quantity});
  spec.layers.push_back(std::move(edge));
  return spec;
}

HostPool two_hosts(std::int64_t slots_each) {
  return {{{"h1", "edge", slots_each, Rational(1)},
           {"h2", "edge", slots_each, Rational(1)}}};
}

}  // namespace

TEST_SUITE("mapping") {

TEST_CASE("round robin cycles hosts in declared order") {
  Mapping m = resolve_mapping(qty_spec(3), two_hosts(2), MapStrategy::round_robin);
  REQUIRE(m.assignments.size() == 3);
  CHECK(m.assignments[0] == std::pair<std::string, std::string>{"s.0", "h1"});
  CHECK(m.assignments[1] == std::pair<std::string, std::string>{"s.1", "h2"});
  CHECK(m.assignments[2] == std::pair<std::string, std::string>{"s.2", "h1"});
}

TEST_CASE("first fit fills a host before advancing") {
  Mapping m = resolve_mapping(qty_spec(3), two_hosts(2), MapStrategy::first_fit);
  REQUIRE(m.assignments.size() == 3);
  CHECK(m.assignments[0] == std::pair<std::string, std::string>{"s.0", "h1"});
  CHECK(m.assignments[1] == std::pair<std::string, std::string>{"s.1", "h1"});
  CHECK(m.assignments[2] == std::pair<std::string, std::string>{"s.2", "h2"});
}

TEST_CASE("capacity errors") {
  HostPool small{{{"h1", "edge", 2, Rational(1)}}};
  try {
    resolve_mapping(qty_spec(3), small, MapStrategy::round_robin);
    FAIL("expected CapacityExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::capacity_exceeded);
    CHECK(std::string(e.what()).find("edge") != std::string::npos);
  }

  HostPool wrong_layer{{{"h1", "cloud", 8, Rational(1)}}};
  CHECK_THROWS_AS(resolve_mapping(qty_spec(1), wrong_layer, MapStrategy::round_robin),
                  Error);
}

TEST_CASE("check_capacity boundaries") {
  CHECK(check_capacity(qty_spec(2), two_hosts(1)).empty());  // 2 instances, 2 slots
  auto violations = check_capacity(qty_spec(3), two_hosts(1));
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].code == Violation::Code::capacity_exceeded);
  CHECK(violations[0].path == "layers[0]");

  // a layer with no services needs no hosts
  ExperimentSpec spec = qty_spec(1);
  spec.layers.push_back({"empty", {}});
  CHECK(check_capacity(spec, two_hosts(1)).empty());
}

TEST_CASE("assigned instances equal the declared multiset") {
  SplitMix64 rng(404);
  for (int round = 0; round < 30; ++round) {
    ExperimentSpec spec;
    Layer layer;
    layer.name = "edge";
    std::int64_t total = 0;
    std::size_t n_services = 1 + rng.next_below(4);
    for (std::size_t s = 0; s < n_services; ++s) {
      std::int64_t qty = 1 + static_cast<std::int64_t>(rng.next_below(5));
      total += qty;
      layer.services.push_back({.id = "svc" + std::to_string(s), .kind = "sink",
                                .quantity = qty});
    }
    spec.layers.push_back(std::move(layer));

    HostPool pool;
    std::int64_t slots = 0;
    std::size_t n_hosts = 1 + rng.next_below(4);
    for (std::size_t h = 0; h < n_hosts; ++h) {
      std::int64_t cap = 1 + static_cast<std::int64_t>(rng.next_below(6));
      slots += cap;
      pool.hosts.push_back({"h" + std::to_string(h), "edge", cap, Rational(1)});
    }
    if (slots < total) continue;

    for (MapStrategy strategy : {MapStrategy::round_robin, MapStrategy::first_fit}) {
      Mapping m = resolve_mapping(spec.layers.empty() ? spec : spec, pool, strategy);
      CHECK(static_cast<std::int64_t>(m.assignments.size()) == total);
      // no instance assigned twice
      std::map<std::string, int> seen;
      std::map<std::string, std::int64_t> per_host;
      for (const auto& [inst, host] : m.assignments) {
        seen[inst] += 1;
        per_host[host] += 1;
      }
      CHECK(static_cast<std::int64_t>(seen.size()) == total);
      for (const auto& [inst, n] : seen) CHECK(n == 1);
      for (const Host& host : pool.hosts) CHECK(per_host[host.id] <= host.slot_capacity);

      // identical declaration order is byte-identical
      CHECK(resolve_mapping(spec, pool, strategy) == m);
    }
  }
}

TEST_CASE("permuting host order keeps the mapping valid") {
  ExperimentSpec spec = qty_spec(4);
  HostPool pool = two_hosts(2);
  Mapping before = resolve_mapping(spec, pool, MapStrategy::round_robin);
  std::swap(pool.hosts[0], pool.hosts[1]);
  Mapping after = resolve_mapping(spec, pool, MapStrategy::round_robin);
  CHECK(before.assignments.size() == after.assignments.size());
  std::map<std::string, std::int64_t> per_host;
  for (const auto& [inst, host] : after.assignments) per_host[host] += 1;
  for (const Host& host : pool.hosts) CHECK(per_host[host.id] <= host.slot_capacity);
}

TEST_CASE("strategies agree on single-host layers") {
  ExperimentSpec spec = qty_spec(5);
  HostPool pool{{{"only", "edge", 5, Rational(1)}}};
  CHECK(resolve_mapping(spec, pool, MapStrategy::round_robin) ==
        resolve_mapping(spec, pool, MapStrategy::first_fit));
}

TEST_CASE("mapping digest is deterministic and content-sensitive") {
  Mapping a = resolve_mapping(qty_spec(3), two_hosts(2), MapStrategy::round_robin);
  Mapping b = resolve_mapping(qty_spec(3), two_hosts(2), MapStrategy::first_fit);
  CHECK(mapping_digest(a) == mapping_digest(a));
  CHECK(mapping_digest(a) != mapping_digest(b));
  CHECK(mapping_digest(a).size() == 64);
}

TEST_CASE("host pool parsing and the synthesized default") {
  HostPool pool = parse_pool(R"(
hosts:
  - {id: h1, layer: edge, slots: 4, cpu_capacity: 2.5}
  - {id: h2, layer: cloud}
)");
  REQUIRE(pool.hosts.size() == 2);
  CHECK(pool.hosts[0].slot_capacity == 4);
  CHECK(pool.hosts[0].cpu_capacity == Rational(5, 2));
  CHECK(pool.hosts[1].slot_capacity == 1);

  CHECK_THROWS_AS(parse_pool("hosts: [{id: a, layer: e}, {id: a, layer: e}]"), Error);

  ExperimentSpec spec = testutil::three_layer_spec();
  HostPool synth = synthesize_pool(spec);
  REQUIRE(synth.hosts.size() == 3);
  CHECK(check_capacity(spec, synth).empty());
  CHECK_NOTHROW(resolve_mapping(spec, synth, MapStrategy::round_robin));
}

TEST_CASE("parse_strategy") {
  CHECK(parse_strategy("round_robin") == MapStrategy::round_robin);
  CHECK(parse_strategy("first_fit") == MapStrategy::first_fit);
  CHECK_THROWS_AS(parse_strategy("best_fit"), Error);
}

}  // TEST_SUITE
