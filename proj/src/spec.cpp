#include "clab/spec.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "clab/behavior.hpp"
#include "clab/sha256.hpp"

namespace clab {

using json = nlohmann::json;

const char* phase_kind_name(WorkflowPhase::Kind kind) {
  switch (kind) {
    case WorkflowPhase::Kind::launch: return "launch";
    case WorkflowPhase::Kind::inject: return "inject";
    case WorkflowPhase::Kind::wait_until: return "wait_until";
    case WorkflowPhase::Kind::gather: return "gather";
  }
  return "?";
}

const char* violation_code_name(Violation::Code code) {
  switch (code) {
    case Violation::Code::no_layers: return "NoLayers";
    case Violation::Code::empty_layer_name: return "EmptyLayerName";
    case Violation::Code::duplicate_layer_name: return "DuplicateLayerName";
    case Violation::Code::duplicate_service_id: return "DuplicateServiceId";
    case Violation::Code::unknown_behavior: return "UnknownBehavior";
    case Violation::Code::quantity_out_of_range: return "QuantityOutOfRange";
    case Violation::Code::cpu_capacity_out_of_range: return "CpuCapacityOutOfRange";
    case Violation::Code::unknown_layer: return "UnknownLayer";
    case Violation::Code::loss_out_of_range: return "LossOutOfRange";
    case Violation::Code::duplicate_network_rule: return "DuplicateNetworkRule";
    case Violation::Code::repetitions_out_of_range: return "RepetitionsOutOfRange";
    case Violation::Code::non_monotonic_wait: return "NonMonotonicWait";
    case Violation::Code::invalid_phase_arg: return "InvalidPhaseArg";
    case Violation::Code::duplicate_dimension: return "DuplicateDimension";
    case Violation::Code::empty_domain: return "EmptyDomain";
    case Violation::Code::invalid_range: return "InvalidRange";
    case Violation::Code::capacity_exceeded: return "CapacityExceeded";
    case Violation::Code::missing_layer_hosts: return "MissingLayerHosts";
  }
  return "?";
}

std::string to_string(const Violation& v) {
  return v.path + ": " + violation_code_name(v.code) + ": " + v.message;
}

namespace {

void sort_violations(std::vector<Violation>& out) {
  std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    if (a.path != b.path) return a.path < b.path;
    if (a.code != b.code) return a.code < b.code;
    return a.message < b.message;
  });
}

}  // namespace

std::vector<Violation> validate_spec(const ExperimentSpec& spec) {
  std::vector<Violation> out;
  auto add = [&](Violation::Code code, std::string path, std::string message) {
    out.push_back({code, std::move(path), std::move(message)});
  };

  if (spec.layers.empty())
    add(Violation::Code::no_layers, "layers", "at least one layer is required");

  std::set<std::string> layer_names;
  std::set<std::string> service_ids;
  for (std::size_t li = 0; li < spec.layers.size(); ++li) {
    const Layer& layer = spec.layers[li];
    std::string lpath = "layers[" + std::to_string(li) + "]";
    if (layer.name.empty())
      add(Violation::Code::empty_layer_name, lpath + ".name", "layer name is empty");
    if (!layer_names.insert(layer.name).second)
      add(Violation::Code::duplicate_layer_name, lpath + ".name",
          "layer '" + layer.name + "' declared more than once");
    for (std::size_t si = 0; si < layer.services.size(); ++si) {
      const ServiceDef& svc = layer.services[si];
      std::string spath = lpath + ".services[" + std::to_string(si) + "]";
      if (!service_ids.insert(svc.id).second)
        add(Violation::Code::duplicate_service_id, spath + ".id",
            "service id '" + svc.id + "' is not unique");
      if (!behaviors::registry().contains(svc.kind))
        add(Violation::Code::unknown_behavior, spath + ".kind",
            "behavior '" + svc.kind + "' is not registered");
      if (svc.quantity < 1)
        add(Violation::Code::quantity_out_of_range, spath + ".quantity",
            "quantity must be >= 1");
      if (!(svc.cpu_capacity > Rational(0)))
        add(Violation::Code::cpu_capacity_out_of_range, spath + ".cpu_capacity",
            "cpu_capacity must be > 0");
    }
  }

  std::set<std::pair<std::string, std::string>> directed;
  for (std::size_t ri = 0; ri < spec.network_rules.size(); ++ri) {
    const NetworkRule& rule = spec.network_rules[ri];
    std::string rpath = "network_rules[" + std::to_string(ri) + "]";
    if (!layer_names.count(rule.src_layer))
      add(Violation::Code::unknown_layer, rpath + ".src_layer",
          "layer '" + rule.src_layer + "' is not declared");
    if (!layer_names.count(rule.dst_layer))
      add(Violation::Code::unknown_layer, rpath + ".dst_layer",
          "layer '" + rule.dst_layer + "' is not declared");
    if (rule.loss_rate < Rational(0) || rule.loss_rate > Rational(1))
      add(Violation::Code::loss_out_of_range, rpath + ".loss_rate",
          "loss rate " + rule.loss_rate.fraction_str() + " outside [0,1]");
    if (!directed.insert({rule.src_layer, rule.dst_layer}).second)
      add(Violation::Code::duplicate_network_rule, rpath,
          "more than one rule for " + rule.src_layer + " -> " + rule.dst_layer);
    if (rule.symmetric && rule.src_layer != rule.dst_layer &&
        !directed.insert({rule.dst_layer, rule.src_layer}).second)
      add(Violation::Code::duplicate_network_rule, rpath,
          "symmetric expansion duplicates " + rule.dst_layer + " -> " + rule.src_layer);
  }

  if (spec.repetitions < 1)
    add(Violation::Code::repetitions_out_of_range, "repetitions",
        "repetitions must be >= 1");

  std::int64_t last_wait = -1;
  for (std::size_t pi = 0; pi < spec.workflow.size(); ++pi) {
    const WorkflowPhase& phase = spec.workflow[pi];
    std::string ppath = "workflow[" + std::to_string(pi) + "]";
    if (phase.kind == WorkflowPhase::Kind::wait_until) {
      auto it = phase.args.find("sim_time_ns");
      if (it == phase.args.end()) {
        add(Violation::Code::invalid_phase_arg, ppath + ".args.sim_time_ns",
            "wait_until needs a sim_time_ns argument");
        continue;
      }
      std::int64_t t = 0;
      try {
        t = parse_duration_ns(it->second);
      } catch (const Error&) {
        add(Violation::Code::invalid_phase_arg, ppath + ".args.sim_time_ns",
            "not a duration: '" + it->second + "'");
        continue;
      }
      if (t <= last_wait)
        add(Violation::Code::non_monotonic_wait, ppath + ".args.sim_time_ns",
            "wait_until times must be strictly increasing");
      last_wait = std::max(last_wait, t);
    } else if (phase.kind == WorkflowPhase::Kind::inject) {
      if (!phase.args.count("target"))
        add(Violation::Code::invalid_phase_arg, ppath + ".args.target",
            "inject needs a target service");
    }
  }

  std::set<std::string> dim_names;
  for (std::size_t di = 0; di < spec.parameters.dimensions.size(); ++di) {
    const auto& [name, dom] = spec.parameters.dimensions[di];
    std::string dpath = "parameters[" + std::to_string(di) + "]";
    if (!dim_names.insert(name).second)
      add(Violation::Code::duplicate_dimension, dpath,
          "dimension '" + name + "' declared more than once");
    switch (dom.kind) {
      case ParamDomain::Kind::discrete:
        if (dom.values.empty())
          add(Violation::Code::empty_domain, dpath, "value list is empty");
        break;
      case ParamDomain::Kind::range:
        if (dom.lo > dom.hi)
          add(Violation::Code::invalid_range, dpath, "range lo > hi");
        if (dom.step <= 0)
          add(Violation::Code::invalid_range, dpath, "step must be > 0");
        break;
      case ParamDomain::Kind::continuous:
        if (dom.continuous_lo > dom.continuous_hi)
          add(Violation::Code::invalid_range, dpath, "continuous lo > hi");
        break;
    }
  }

  sort_violations(out);
  return out;
}

namespace {

json param_value_json(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

json domain_json(const ParamDomain& dom) {
  json j;
  switch (dom.kind) {
    case ParamDomain::Kind::discrete: {
      j["kind"] = "discrete";
      json values = json::array();
      for (const ParamValue& v : dom.values) values.push_back(param_value_json(v));
      j["values"] = std::move(values);
      break;
    }
    case ParamDomain::Kind::range:
      j["kind"] = "range";
      j["lo"] = dom.lo;
      j["hi"] = dom.hi;
      j["step"] = dom.step;
      break;
    case ParamDomain::Kind::continuous:
      j["kind"] = "continuous";
      j["lo"] = dom.continuous_lo;
      j["hi"] = dom.continuous_hi;
      break;
  }
  return j;
}

}  // namespace

std::string canonical_spec(const ExperimentSpec& spec) {
  json root;
  root["name"] = spec.name;
  root["repetitions"] = spec.repetitions;

  json layers = json::array();
  for (const Layer& layer : spec.layers) {
    json services = json::array();
    for (const ServiceDef& svc : layer.services) {
      json params(svc.params);
      services.push_back({{"cpu_capacity", svc.cpu_capacity.fraction_str()},
                          {"id", svc.id},
                          {"kind", svc.kind},
                          {"params", std::move(params)},
                          {"quantity", svc.quantity}});
    }
    layers.push_back({{"name", layer.name}, {"services", std::move(services)}});
  }
  root["layers"] = std::move(layers);

  json rules = json::array();
  for (const NetworkRule& rule : spec.network_rules) {
    json r = {{"delay_ns", rule.delay_ns},
              {"dst_layer", rule.dst_layer},
              {"jitter_ns", rule.jitter_ns},
              {"loss_rate", rule.loss_rate.fraction_str()},
              {"src_layer", rule.src_layer},
              {"symmetric", rule.symmetric}};
    if (rule.bandwidth_bps) r["bandwidth_bps"] = *rule.bandwidth_bps;
    else r["bandwidth_bps"] = "unlimited";
    rules.push_back(std::move(r));
  }
  root["network_rules"] = std::move(rules);

  json workflow = json::array();
  for (const WorkflowPhase& phase : spec.workflow)
    workflow.push_back({{"args", json(phase.args)},
                        {"kind", phase_kind_name(phase.kind)},
                        {"name", phase.name}});
  root["workflow"] = std::move(workflow);

  json params = json::array();
  for (const auto& [name, dom] : spec.parameters.dimensions)
    params.push_back({{"domain", domain_json(dom)}, {"name", name}});
  root["parameters"] = std::move(params);

  return root.dump();
}

std::string canonical_digest(const ExperimentSpec& spec) {
  return Sha256::hex_of(canonical_spec(spec));
}

}  // namespace clab
