#include "clab/scenarios.hpp"

#include <string>

namespace clab {

Preset parse_preset(std::string_view name) {
  if (name == "cloud_centric") return Preset::cloud_centric;
  if (name == "hybrid") return Preset::hybrid;
  if (name == "quadratic") return Preset::quadratic;
  raise(Errc::unknown_preset, "no preset '" + std::string(name) + "'");
}

const char* preset_name(Preset preset) {
  switch (preset) {
    case Preset::cloud_centric: return "cloud_centric";
    case Preset::hybrid: return "hybrid";
    case Preset::quadratic: return "quadratic";
  }
  return "?";
}

namespace {

Rational ceil_units_ns(const Rational& units, const Rational& cpu) {
  // ceil(units * 1e9 / cpu) as an integer rational
  return Rational((units * Rational(1'000'000'000) / cpu).ceil());
}

WorkflowPhase launch_phase() {
  return {"start", WorkflowPhase::Kind::launch, {}};
}

WorkflowPhase wait_phase(std::int64_t t_ns) {
  return {"horizon", WorkflowPhase::Kind::wait_until,
          {{"sim_time_ns", std::to_string(t_ns)}}};
}

ExperimentSpec quadratic_scenario() {
  ExperimentSpec spec;
  spec.name = "preset-quadratic";
  spec.master_seed = 42;

  Layer edge;
  edge.name = "edge";
  edge.services.push_back({.id = "probe",
                           .kind = "source",
                           .quantity = 1,
                           .cpu_capacity = Rational(1'000'000'000),
                           .params = {{"target", "score"},
                                      {"size_bits", "1"},
                                      {"period_ns", "1000"},
                                      {"records", "1"}}});
  edge.services.push_back({.id = "score",
                           .kind = "quadratic_sink",
                           .quantity = 1,
                           .cpu_capacity = Rational(1'000'000'000),
                           .params = {{"a", "0"}, {"b", "0"}}});
  spec.layers.push_back(std::move(edge));

  spec.workflow = {launch_phase(), wait_phase(1'000'000)};

  ParamDomain grid{.kind = ParamDomain::Kind::range, .lo = 0, .hi = 19, .step = 1};
  spec.parameters.dimensions.emplace_back("a", grid);
  spec.parameters.dimensions.emplace_back("b", grid);
  return spec;
}

}  // namespace

ExperimentSpec build_scenario(Preset preset, const ScenarioParams& params) {
  if (preset == Preset::quadratic) return quadratic_scenario();

  ExperimentSpec spec;
  spec.name = std::string("preset-") + preset_name(preset);
  spec.master_seed = 42;

  Layer edge;
  edge.name = "edge";
  ServiceDef cam{.id = "cam",
                 .kind = "source",
                 .quantity = 1,
                 .cpu_capacity = params.edge_cpu,
                 .params = {{"size_bits", std::to_string(params.record_bits)},
                            {"period_ns", std::to_string(params.period_ns)},
                            {"records", std::to_string(params.n_records)}}};
  if (preset == Preset::cloud_centric) {
    cam.params["target"] = "analytics";
  } else {
    cam.params["target"] = "prep";
    edge.services.push_back(
        {.id = "prep",
         .kind = "transform",
         .quantity = 1,
         .cpu_capacity = params.edge_cpu,
         .params = {{"target", "analytics"},
                    {"size_multiplier", params.size_multiplier.fraction_str()},
                    {"base_units", params.preprocess_units.fraction_str()}}});
  }
  edge.services.insert(edge.services.begin(), std::move(cam));
  spec.layers.push_back(std::move(edge));

  Layer cloud;
  cloud.name = "cloud";
  cloud.services.push_back(
      {.id = "analytics",
       .kind = "sink",
       .quantity = 1,
       .cpu_capacity = params.cloud_cpu,
       .params = {{"base_units", params.cloud_service_units.fraction_str()}}});
  spec.layers.push_back(std::move(cloud));

  spec.network_rules.push_back({.src_layer = "edge",
                                .dst_layer = "cloud",
                                .delay_ns = params.delay_ns,
                                .jitter_ns = 0,
                                .bandwidth_bps = params.bandwidth_bps,
                                .loss_rate = Rational(0),
                                .symmetric = true});

  // emissions run through (n-1)*period; one extra period absorbs the last
  // record's transit and service time
  std::int64_t horizon = params.n_records * params.period_ns;
  spec.workflow = {launch_phase(), wait_phase(horizon)};
  return spec;
}

std::int64_t analytic_latency(Preset preset, const ScenarioParams& params) {
  Rational cloud_ns = ceil_units_ns(params.cloud_service_units, params.cloud_cpu);
  std::int64_t raw_serialization =
      ceil_div(static_cast<__int128>(params.record_bits) * 1'000'000'000,
               params.bandwidth_bps);
  switch (preset) {
    case Preset::cloud_centric:
      return raw_serialization + params.delay_ns + cloud_ns.num();
    case Preset::hybrid: {
      Rational shipped = params.size_multiplier * Rational(params.record_bits) *
                         Rational(1'000'000'000) / Rational(params.bandwidth_bps);
      return ceil_units_ns(params.preprocess_units, params.edge_cpu).num() +
             shipped.ceil() + params.delay_ns + cloud_ns.num();
    }
    case Preset::quadratic:
      break;
  }
  raise(Errc::unknown_preset, "no analytic latency for this preset");
}

}  // namespace clab
