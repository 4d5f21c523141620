#include "clab/mapping.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "clab/sha256.hpp"

namespace clab {

MapStrategy parse_strategy(std::string_view name) {
  if (name == "round_robin") return MapStrategy::round_robin;
  if (name == "first_fit") return MapStrategy::first_fit;
  raise(Errc::invalid_argument, "unknown mapping strategy '" + std::string(name) + "'");
}

std::string instance_name(const std::string& service_id, std::int64_t index) {
  return service_id + "." + std::to_string(index);
}

namespace {

std::int64_t layer_instance_count(const Layer& layer) {
  std::int64_t n = 0;
  for (const ServiceDef& svc : layer.services) n += svc.quantity;
  return n;
}

std::int64_t layer_slot_sum(const HostPool& pool, const std::string& layer) {
  std::int64_t n = 0;
  for (const Host& host : pool.hosts)
    if (host.layer == layer) n += host.slot_capacity;
  return n;
}

}  // namespace

Mapping resolve_mapping(const ExperimentSpec& spec, const HostPool& pool,
                        MapStrategy strategy) {
  Mapping mapping;
  for (const Layer& layer : spec.layers) {
    std::int64_t instances = layer_instance_count(layer);
    if (instances == 0) continue;

    std::vector<const Host*> hosts;
    for (const Host& host : pool.hosts)
      if (host.layer == layer.name) hosts.push_back(&host);
    if (hosts.empty())
      raise(Errc::missing_layer_hosts, "no hosts for layer '" + layer.name + "'");
    if (instances > layer_slot_sum(pool, layer.name))
      raise(Errc::capacity_exceeded,
            "layer '" + layer.name + "' needs " + std::to_string(instances) +
                " slots, has " + std::to_string(layer_slot_sum(pool, layer.name)));

    std::vector<std::int64_t> used(hosts.size(), 0);
    std::size_t cursor = 0;  // round-robin position
    for (const ServiceDef& svc : layer.services) {
      for (std::int64_t k = 0; k < svc.quantity; ++k) {
        std::size_t pick = hosts.size();
        if (strategy == MapStrategy::round_robin) {
          for (std::size_t probe = 0; probe < hosts.size(); ++probe) {
            std::size_t h = (cursor + probe) % hosts.size();
            if (used[h] < hosts[h]->slot_capacity) {
              pick = h;
              cursor = (h + 1) % hosts.size();
              break;
            }
          }
        } else {  // first_fit
          for (std::size_t h = 0; h < hosts.size(); ++h)
            if (used[h] < hosts[h]->slot_capacity) {
              pick = h;
              break;
            }
        }
        // capacity was checked up front
        ++used[pick];
        mapping.assignments.emplace_back(instance_name(svc.id, k), hosts[pick]->id);
      }
    }
  }
  return mapping;
}

std::vector<Violation> check_capacity(const ExperimentSpec& spec, const HostPool& pool) {
  std::vector<Violation> out;
  for (std::size_t li = 0; li < spec.layers.size(); ++li) {
    const Layer& layer = spec.layers[li];
    std::int64_t instances = layer_instance_count(layer);
    if (instances == 0) continue;
    std::string path = "layers[" + std::to_string(li) + "]";
    std::int64_t slots = layer_slot_sum(pool, layer.name);
    bool has_hosts = std::any_of(pool.hosts.begin(), pool.hosts.end(),
                                 [&](const Host& h) { return h.layer == layer.name; });
    if (!has_hosts) {
      out.push_back({Violation::Code::missing_layer_hosts, path,
                     "no hosts for layer '" + layer.name + "'"});
    } else if (instances > slots) {
      out.push_back({Violation::Code::capacity_exceeded, path,
                     "layer '" + layer.name + "': " + std::to_string(instances) +
                         " instances exceed " + std::to_string(slots) + " slots"});
    }
  }
  return out;
}

std::string mapping_digest(const Mapping& mapping) {
  Sha256 h;
  for (const auto& [instance, host] : mapping.assignments) {
    h.update(instance);
    h.update("\t");
    h.update(host);
    h.update("\n");
  }
  return h.hex();
}

HostPool parse_pool(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    raise(Errc::syntax, e.what());
  }
  if (!root.IsMap() || !root["hosts"])
    raise(Errc::schema, "host pool document needs a top-level 'hosts' list");
  HostPool pool;
  std::set<std::string> ids;
  for (const auto& node : root["hosts"]) {
    Host host;
    if (!node["id"] || !node["layer"])
      raise(Errc::schema, "host entries need 'id' and 'layer'");
    host.id = node["id"].Scalar();
    host.layer = node["layer"].Scalar();
    if (node["slots"]) host.slot_capacity = parse_count(node["slots"].Scalar(), "slots");
    if (node["cpu_capacity"]) host.cpu_capacity = Rational::parse(node["cpu_capacity"].Scalar());
    if (host.slot_capacity < 1) raise(Errc::schema, "host slots must be >= 1");
    if (!(host.cpu_capacity > Rational(0)))
      raise(Errc::schema, "host cpu_capacity must be > 0");
    if (!ids.insert(host.id).second)
      raise(Errc::schema, "duplicate host id '" + host.id + "'");
    pool.hosts.push_back(std::move(host));
  }
  return pool;
}

HostPool load_pool_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pool(buf.str());
}

HostPool synthesize_pool(const ExperimentSpec& spec) {
  HostPool pool;
  for (const Layer& layer : spec.layers) {
    Host host;
    host.id = layer.name + "-host";
    host.layer = layer.name;
    host.slot_capacity = std::max<std::int64_t>(1, layer_instance_count(layer));
    Rational cpu = Rational(1);
    for (const ServiceDef& svc : layer.services) cpu = std::max(cpu, svc.cpu_capacity);
    host.cpu_capacity = cpu;
    pool.hosts.push_back(std::move(host));
  }
  return pool;
}

}  // namespace clab
