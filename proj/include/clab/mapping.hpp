#ifndef CLAB_MAPPING_HPP
#define CLAB_MAPPING_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "clab/spec.hpp"

namespace clab {

struct Host {
  std::string id;
  std::string layer;
  std::int64_t slot_capacity = 1;  // max co-located instances
  Rational cpu_capacity = Rational(1);

  bool operator==(const Host&) const = default;
};

struct HostPool {
  std::vector<Host> hosts;

  bool operator==(const HostPool&) const = default;
};

enum class MapStrategy { round_robin, first_fit };

MapStrategy parse_strategy(std::string_view name);

/// Instance "<service_id>.<k>" -> host id, in (layer, service, index) order.
struct Mapping {
  std::vector<std::pair<std::string, std::string>> assignments;

  bool operator==(const Mapping&) const = default;
};

std::string instance_name(const std::string& service_id, std::int64_t index);

/// Deterministic placement. Throws Errc::capacity_exceeded or
/// Errc::missing_layer_hosts.
Mapping resolve_mapping(const ExperimentSpec& spec, const HostPool& pool,
                        MapStrategy strategy = MapStrategy::round_robin);

/// Non-throwing capacity probe; one CapacityExceeded / MissingLayerHosts
/// violation per failing layer.
std::vector<Violation> check_capacity(const ExperimentSpec& spec, const HostPool& pool);

/// SHA-256 over the canonical assignment list.
std::string mapping_digest(const Mapping& mapping);

/// YAML `hosts: [{id, layer, slots, cpu_capacity}]`.
HostPool parse_pool(std::string_view text);
HostPool load_pool_file(const std::filesystem::path& path);

/// Emulation default: one host per layer, slots = instance count of the
/// layer, cpu wide enough that service capacities stay binding.
HostPool synthesize_pool(const ExperimentSpec& spec);

}  // namespace clab

#endif  // CLAB_MAPPING_HPP
