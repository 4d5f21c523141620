#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "clab/spec.hpp"

namespace clab {

namespace {

std::string node_path(const std::string& base, const char* key) {
  return base.empty() ? key : base + "." + key;
}

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  raise(Errc::schema, path + ": " + what);
}

void expect_map(const YAML::Node& node, const std::string& path) {
  if (!node.IsMap()) schema_error(path, "expected a mapping");
}

void expect_sequence(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) schema_error(path, "expected a sequence");
}

std::string scalar(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) schema_error(path, "expected a scalar");
  return node.Scalar();
}

void check_keys(const YAML::Node& node, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& kv : node) {
    std::string key = kv.first.Scalar();
    bool known = false;
    for (const char* k : allowed)
      if (key == k) {
        known = true;
        break;
      }
    if (!known) schema_error(path, "unknown key '" + key + "'");
  }
}

Rational scalar_rational(const YAML::Node& node, const std::string& path) {
  try {
    return Rational::parse(scalar(node, path));
  } catch (const Error& e) {
    if (e.code() == Errc::schema)
      schema_error(path, "not a number: '" + scalar(node, path) + "'");
    throw;
  }
}

double scalar_double(const YAML::Node& node, const std::string& path) {
  std::string s = scalar(node, path);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v))
    schema_error(path, "expected a number, got '" + s + "'");
  return v;
}

std::int64_t scalar_count(const YAML::Node& node, const std::string& path) {
  std::string s = scalar(node, path);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    schema_error(path, "expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t scalar_seed(const YAML::Node& node, const std::string& path) {
  std::string s = scalar(node, path);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    schema_error(path, "expected an unsigned integer, got '" + s + "'");
  return v;
}

bool scalar_bool(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<bool>();
  } catch (const YAML::Exception&) {
    schema_error(path, "expected a boolean");
  }
}

std::map<std::string, std::string> string_map(const YAML::Node& node,
                                              const std::string& path) {
  std::map<std::string, std::string> out;
  if (!node) return out;
  expect_map(node, path);
  for (const auto& kv : node) {
    std::string key = kv.first.Scalar();
    out[key] = scalar(kv.second, node_path(path, key.c_str()));
  }
  return out;
}

bool looks_like_int(std::string_view s, std::int64_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool looks_like_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char c = s.front();
  if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.'))
    return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

ParamValue parse_param_value(const YAML::Node& node, const std::string& path) {
  std::string s = scalar(node, path);
  if (node.Tag() == "!") return ParamValue(std::move(s));  // quoted -> string
  std::int64_t i = 0;
  if (looks_like_int(s, i)) return ParamValue(i);
  double d = 0;
  if (looks_like_double(s, d)) return ParamValue(d);
  return ParamValue(std::move(s));
}

ParamDomain parse_domain(const YAML::Node& node, const std::string& path) {
  ParamDomain dom;
  if (node.IsSequence()) {
    dom.kind = ParamDomain::Kind::discrete;
    std::size_t i = 0;
    for (const auto& item : node)
      dom.values.push_back(parse_param_value(item, path + "[" + std::to_string(i++) + "]"));
    return dom;
  }
  expect_map(node, path);
  check_keys(node, path, {"range", "step", "continuous"});
  if (node["continuous"]) {
    const YAML::Node& c = node["continuous"];
    expect_sequence(c, node_path(path, "continuous"));
    if (c.size() != 2) schema_error(path, "continuous expects [lo, hi]");
    dom.kind = ParamDomain::Kind::continuous;
    dom.continuous_lo = scalar_double(c[0], path);
    dom.continuous_hi = scalar_double(c[1], path);
    return dom;
  }
  if (!node["range"]) schema_error(path, "domain needs 'range' or 'continuous' or a value list");
  const YAML::Node& r = node["range"];
  expect_sequence(r, node_path(path, "range"));
  if (r.size() != 2) schema_error(path, "range expects [lo, hi]");
  dom.kind = ParamDomain::Kind::range;
  dom.lo = scalar_count(r[0], node_path(path, "range"));
  dom.hi = scalar_count(r[1], node_path(path, "range"));
  dom.step = node["step"] ? scalar_count(node["step"], node_path(path, "step")) : 1;
  return dom;
}

ServiceDef parse_service(const YAML::Node& node, const std::string& path) {
  expect_map(node, path);
  check_keys(node, path, {"id", "kind", "quantity", "cpu_capacity", "params"});
  ServiceDef svc;
  if (!node["id"]) schema_error(path, "service needs 'id'");
  svc.id = scalar(node["id"], node_path(path, "id"));
  if (!node["kind"]) schema_error(path, "service needs 'kind'");
  svc.kind = scalar(node["kind"], node_path(path, "kind"));
  if (node["quantity"])
    svc.quantity = scalar_count(node["quantity"], node_path(path, "quantity"));
  if (node["cpu_capacity"])
    svc.cpu_capacity = scalar_rational(node["cpu_capacity"], node_path(path, "cpu_capacity"));
  svc.params = string_map(node["params"], node_path(path, "params"));
  return svc;
}

NetworkRule parse_rule(const YAML::Node& node, const std::string& path) {
  expect_map(node, path);
  check_keys(node, path, {"src", "dst", "delay", "jitter", "bandwidth", "loss", "symmetric"});
  NetworkRule rule;
  if (!node["src"] || !node["dst"]) schema_error(path, "network rule needs 'src' and 'dst'");
  rule.src_layer = scalar(node["src"], node_path(path, "src"));
  rule.dst_layer = scalar(node["dst"], node_path(path, "dst"));
  if (node["delay"]) {
    try {
      rule.delay_ns = parse_duration_ns(scalar(node["delay"], node_path(path, "delay")));
    } catch (const Error& e) {
      schema_error(node_path(path, "delay"), e.what());
    }
  }
  if (node["jitter"]) {
    try {
      rule.jitter_ns = parse_duration_ns(scalar(node["jitter"], node_path(path, "jitter")));
    } catch (const Error& e) {
      schema_error(node_path(path, "jitter"), e.what());
    }
  }
  if (node["bandwidth"]) {
    try {
      rule.bandwidth_bps =
          parse_bandwidth_bps(scalar(node["bandwidth"], node_path(path, "bandwidth")));
    } catch (const Error& e) {
      schema_error(node_path(path, "bandwidth"), e.what());
    }
  }
  if (node["loss"]) rule.loss_rate = scalar_rational(node["loss"], node_path(path, "loss"));
  if (node["symmetric"])
    rule.symmetric = scalar_bool(node["symmetric"], node_path(path, "symmetric"));
  return rule;
}

WorkflowPhase parse_phase(const YAML::Node& node, const std::string& path) {
  expect_map(node, path);
  check_keys(node, path, {"name", "kind", "args"});
  WorkflowPhase phase;
  if (!node["name"]) schema_error(path, "phase needs 'name'");
  phase.name = scalar(node["name"], node_path(path, "name"));
  if (!node["kind"]) schema_error(path, "phase needs 'kind'");
  std::string kind = scalar(node["kind"], node_path(path, "kind"));
  if (kind == "launch") phase.kind = WorkflowPhase::Kind::launch;
  else if (kind == "inject") phase.kind = WorkflowPhase::Kind::inject;
  else if (kind == "wait_until") phase.kind = WorkflowPhase::Kind::wait_until;
  else if (kind == "gather") phase.kind = WorkflowPhase::Kind::gather;
  else schema_error(node_path(path, "kind"), "unknown phase kind '" + kind + "'");
  phase.args = string_map(node["args"], node_path(path, "args"));
  return phase;
}

bool value_needs_quoting(const std::string& s) {
  std::int64_t i;
  double d;
  return looks_like_int(s, i) || looks_like_double(s, d);
}

}  // namespace

std::int64_t parse_duration_ns(std::string_view text) {
  std::int64_t mult = 1;
  if (text.ends_with("ns")) {
    text.remove_suffix(2);
  } else if (text.ends_with("us")) {
    text.remove_suffix(2);
    mult = 1000;
  } else if (text.ends_with("ms")) {
    text.remove_suffix(2);
    mult = 1'000'000;
  } else if (text.ends_with("s")) {
    text.remove_suffix(1);
    mult = 1'000'000'000;
  }
  Rational value = Rational::parse(text) * Rational(mult);
  if (value.is_negative()) raise(Errc::schema, "negative duration");
  if (!value.is_integer())
    raise(Errc::schema, "duration is not a whole number of nanoseconds");
  return value.num();
}

std::optional<std::int64_t> parse_bandwidth_bps(std::string_view text) {
  if (text == "unlimited") return std::nullopt;
  std::int64_t mult = 1;
  if (text.ends_with("Kbps")) {
    text.remove_suffix(4);
    mult = 1'000;
  } else if (text.ends_with("Mbps")) {
    text.remove_suffix(4);
    mult = 1'000'000;
  } else if (text.ends_with("Gbps")) {
    text.remove_suffix(4);
    mult = 1'000'000'000;
  } else if (text.ends_with("bps")) {
    text.remove_suffix(3);
  }
  Rational value = Rational::parse(text) * Rational(mult);
  if (!value.is_integer() || value.num() <= 0)
    raise(Errc::schema, "bandwidth must be a positive whole number of bits per second");
  return value.num();
}

std::int64_t parse_count(std::string_view text, const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    raise(Errc::schema, std::string(what) + " expects an integer, got '" +
                            std::string(text) + "'");
  return v;
}

std::string param_value_str(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    std::string s = buf;
    if (s.find_first_of(".eE") == std::string::npos &&
        s.find_first_not_of("-0123456789") == std::string::npos)
      s += ".0";
    return s;
  }
  return std::get<std::string>(v);
}

ExperimentSpec parse_spec(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    raise(Errc::syntax, e.what());
  }
  if (!root.IsMap()) raise(Errc::syntax, "experiment document must be a mapping");
  check_keys(root, "", {"name", "seed", "repetitions", "layers", "network",
                        "workflow", "parameters"});

  ExperimentSpec spec;
  if (root["name"]) spec.name = scalar(root["name"], "name");
  if (root["seed"]) spec.master_seed = scalar_seed(root["seed"], "seed");
  if (root["repetitions"])
    spec.repetitions = scalar_count(root["repetitions"], "repetitions");

  if (root["layers"]) {
    expect_sequence(root["layers"], "layers");
    std::size_t li = 0;
    for (const auto& layer_node : root["layers"]) {
      std::string lpath = "layers[" + std::to_string(li++) + "]";
      expect_map(layer_node, lpath);
      check_keys(layer_node, lpath, {"name", "services"});
      Layer layer;
      if (!layer_node["name"]) schema_error(lpath, "layer needs 'name'");
      layer.name = scalar(layer_node["name"], node_path(lpath, "name"));
      if (layer_node["services"]) {
        expect_sequence(layer_node["services"], node_path(lpath, "services"));
        std::size_t si = 0;
        for (const auto& svc_node : layer_node["services"])
          layer.services.push_back(
              parse_service(svc_node, lpath + ".services[" + std::to_string(si++) + "]"));
      }
      spec.layers.push_back(std::move(layer));
    }
  }

  if (root["network"]) {
    expect_sequence(root["network"], "network");
    std::size_t ri = 0;
    for (const auto& rule_node : root["network"])
      spec.network_rules.push_back(
          parse_rule(rule_node, "network[" + std::to_string(ri++) + "]"));
  }

  if (root["workflow"]) {
    expect_sequence(root["workflow"], "workflow");
    std::size_t pi = 0;
    for (const auto& phase_node : root["workflow"])
      spec.workflow.push_back(
          parse_phase(phase_node, "workflow[" + std::to_string(pi++) + "]"));
  }

  if (root["parameters"]) {
    expect_map(root["parameters"], "parameters");
    for (const auto& kv : root["parameters"]) {
      std::string name = kv.first.Scalar();
      spec.parameters.dimensions.emplace_back(
          name, parse_domain(kv.second, node_path("parameters", name.c_str())));
    }
  }
  return spec;
}

ExperimentSpec load_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

std::string to_yaml(const ExperimentSpec& spec) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << spec.name;
  out << YAML::Key << "seed" << YAML::Value << spec.master_seed;
  out << YAML::Key << "repetitions" << YAML::Value << spec.repetitions;

  out << YAML::Key << "layers" << YAML::Value << YAML::BeginSeq;
  for (const Layer& layer : spec.layers) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << layer.name;
    out << YAML::Key << "services" << YAML::Value << YAML::BeginSeq;
    for (const ServiceDef& svc : layer.services) {
      out << YAML::BeginMap;
      out << YAML::Key << "id" << YAML::Value << svc.id;
      out << YAML::Key << "kind" << YAML::Value << svc.kind;
      out << YAML::Key << "quantity" << YAML::Value << svc.quantity;
      out << YAML::Key << "cpu_capacity" << YAML::Value << svc.cpu_capacity.fraction_str();
      if (!svc.params.empty()) {
        out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
        for (const auto& [k, v] : svc.params) out << YAML::Key << k << YAML::Value << v;
        out << YAML::EndMap;
      }
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  if (!spec.network_rules.empty()) {
    out << YAML::Key << "network" << YAML::Value << YAML::BeginSeq;
    for (const NetworkRule& rule : spec.network_rules) {
      out << YAML::BeginMap;
      out << YAML::Key << "src" << YAML::Value << rule.src_layer;
      out << YAML::Key << "dst" << YAML::Value << rule.dst_layer;
      out << YAML::Key << "delay" << YAML::Value << rule.delay_ns;
      out << YAML::Key << "jitter" << YAML::Value << rule.jitter_ns;
      out << YAML::Key << "bandwidth" << YAML::Value
          << (rule.bandwidth_bps ? std::to_string(*rule.bandwidth_bps)
                                 : std::string("unlimited"));
      out << YAML::Key << "loss" << YAML::Value << rule.loss_rate.fraction_str();
      out << YAML::Key << "symmetric" << YAML::Value << rule.symmetric;
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }

  if (!spec.workflow.empty()) {
    out << YAML::Key << "workflow" << YAML::Value << YAML::BeginSeq;
    for (const WorkflowPhase& phase : spec.workflow) {
      out << YAML::BeginMap;
      out << YAML::Key << "name" << YAML::Value << phase.name;
      out << YAML::Key << "kind" << YAML::Value << phase_kind_name(phase.kind);
      if (!phase.args.empty()) {
        out << YAML::Key << "args" << YAML::Value << YAML::BeginMap;
        for (const auto& [k, v] : phase.args) out << YAML::Key << k << YAML::Value << v;
        out << YAML::EndMap;
      }
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }

  if (!spec.parameters.empty()) {
    out << YAML::Key << "parameters" << YAML::Value << YAML::BeginMap;
    for (const auto& [name, dom] : spec.parameters.dimensions) {
      out << YAML::Key << name << YAML::Value;
      switch (dom.kind) {
        case ParamDomain::Kind::discrete:
          out << YAML::Flow << YAML::BeginSeq;
          for (const ParamValue& v : dom.values) {
            std::string s = param_value_str(v);
            if (std::holds_alternative<std::string>(v) && value_needs_quoting(s))
              out << YAML::DoubleQuoted << s;
            else
              out << s;
          }
          out << YAML::EndSeq;
          break;
        case ParamDomain::Kind::range:
          out << YAML::Flow << YAML::BeginMap;
          out << YAML::Key << "range" << YAML::Value << YAML::Flow << YAML::BeginSeq
              << dom.lo << dom.hi << YAML::EndSeq;
          out << YAML::Key << "step" << YAML::Value << dom.step;
          out << YAML::EndMap;
          break;
        case ParamDomain::Kind::continuous:
          out << YAML::Flow << YAML::BeginMap;
          out << YAML::Key << "continuous" << YAML::Value << YAML::Flow << YAML::BeginSeq
              << param_value_str(ParamValue(dom.continuous_lo))
              << param_value_str(ParamValue(dom.continuous_hi)) << YAML::EndSeq;
          out << YAML::EndMap;
          break;
      }
    }
    out << YAML::EndMap;
  }

  out << YAML::EndMap;
  std::string doc = out.c_str();
  doc += '\n';
  return doc;
}

}  // namespace clab
