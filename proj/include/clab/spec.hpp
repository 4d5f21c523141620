#ifndef CLAB_SPEC_HPP
#define CLAB_SPEC_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "clab/rational.hpp"

namespace clab {

struct ServiceDef {
  std::string id;
  std::string kind;
  std::int64_t quantity = 1;
  Rational cpu_capacity = Rational(1);  // service-units per second
  std::map<std::string, std::string> params;

  bool operator==(const ServiceDef&) const = default;
};

struct Layer {
  std::string name;
  std::vector<ServiceDef> services;

  bool operator==(const Layer&) const = default;
};

struct NetworkRule {
  std::string src_layer;
  std::string dst_layer;
  std::int64_t delay_ns = 0;
  std::int64_t jitter_ns = 0;
  std::optional<std::int64_t> bandwidth_bps;  // nullopt = unlimited
  Rational loss_rate = Rational(0);
  bool symmetric = true;

  bool operator==(const NetworkRule&) const = default;
};

struct WorkflowPhase {
  enum class Kind { launch, inject, wait_until, gather };

  std::string name;
  Kind kind = Kind::launch;
  std::map<std::string, std::string> args;

  bool operator==(const WorkflowPhase&) const = default;
};

const char* phase_kind_name(WorkflowPhase::Kind kind);

using ParamValue = std::variant<std::int64_t, double, std::string>;

/// Declared value -> document scalar, round-trippable (doubles keep a
/// decimal marker, numeric-looking strings are quoted).
std::string param_value_str(const ParamValue& v);

struct ParamDomain {
  enum class Kind { discrete, range, continuous };

  Kind kind = Kind::discrete;
  std::vector<ParamValue> values;          // discrete
  std::int64_t lo = 0, hi = 0, step = 1;   // range
  double continuous_lo = 0, continuous_hi = 0;

  bool operator==(const ParamDomain&) const = default;
};

struct ParameterSpace {
  std::vector<std::pair<std::string, ParamDomain>> dimensions;

  bool empty() const { return dimensions.empty(); }
  bool operator==(const ParameterSpace&) const = default;
};

struct ExperimentSpec {
  std::string name = "experiment";
  std::vector<Layer> layers;
  std::vector<NetworkRule> network_rules;
  std::vector<WorkflowPhase> workflow;
  ParameterSpace parameters;
  std::int64_t repetitions = 1;
  std::uint64_t master_seed = 0;

  bool operator==(const ExperimentSpec&) const = default;
};

struct Violation {
  enum class Code {
    no_layers,
    empty_layer_name,
    duplicate_layer_name,
    duplicate_service_id,
    unknown_behavior,
    quantity_out_of_range,
    cpu_capacity_out_of_range,
    unknown_layer,
    loss_out_of_range,
    duplicate_network_rule,
    repetitions_out_of_range,
    non_monotonic_wait,
    invalid_phase_arg,
    duplicate_dimension,
    empty_domain,
    invalid_range,
    capacity_exceeded,
    missing_layer_hosts,
  };

  Code code;
  std::string path;
  std::string message;

  bool operator==(const Violation&) const = default;
};

const char* violation_code_name(Violation::Code code);
std::string to_string(const Violation& v);

/// Parse the YAML experiment document. Throws Errc::syntax on malformed
/// YAML and Errc::schema on unknown keys / wrong scalar types.
ExperimentSpec parse_spec(std::string_view text);
ExperimentSpec load_spec_file(const std::filesystem::path& path);

/// Structural invariant check; empty result means the spec is valid.
/// Deterministic: violations come back sorted by (path, code).
std::vector<Violation> validate_spec(const ExperimentSpec& spec);

/// Canonical serialization: key-sorted JSON, integers in decimal, rationals
/// as reduced "p/q". The master seed is a run input, not part of the
/// experiment design, and is excluded.
std::string canonical_spec(const ExperimentSpec& spec);

/// SHA-256 hex over canonical_spec().
std::string canonical_digest(const ExperimentSpec& spec);

/// Emit the spec back as a YAML experiment document (round-trips through
/// parse_spec to an equal value).
std::string to_yaml(const ExperimentSpec& spec);

// Document scalar helpers, shared with host-pool parsing and behaviors.
std::int64_t parse_duration_ns(std::string_view text);      // "50ms", "1s", "100"
std::optional<std::int64_t> parse_bandwidth_bps(std::string_view text);
std::int64_t parse_count(std::string_view text, const char* what);

}  // namespace clab

#endif  // CLAB_SPEC_HPP
