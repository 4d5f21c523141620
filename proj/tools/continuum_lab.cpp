#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "clab/archive.hpp"
#include "clab/optimizer.hpp"
#include "clab/scenarios.hpp"
#include "clab/spec.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitDiff = 4;

int exit_code_for(const clab::Error& e) {
  switch (e.code()) {
    case clab::Errc::syntax:
    case clab::Errc::schema:
    case clab::Errc::unknown_behavior:
    case clab::Errc::unknown_preset:
    case clab::Errc::capacity_exceeded:
    case clab::Errc::missing_layer_hosts:
    case clab::Errc::continuous_dimension:
    case clab::Errc::non_numeric_parameter:
    case clab::Errc::invalid_argument:
      return kExitValidation;
    case clab::Errc::corrupt_archive:
      return kExitDiff;
    default:
      return kExitRuntime;
  }
}

struct SpecSource {
  std::string path;
  std::string preset;

  clab::ExperimentSpec load() const {
    if (!preset.empty()) return clab::build_scenario(clab::parse_preset(preset));
    if (path.empty())
      clab::raise(clab::Errc::invalid_argument, "need a spec file or --preset");
    return clab::load_spec_file(path);
  }
};

clab::RunOptions run_options_from_env(std::int64_t sample_interval_ns,
                                      const std::string& placement) {
  clab::RunOptions options;
  options.sample_interval_ns = sample_interval_ns;
  options.strategy = clab::parse_strategy(placement);
  const char* trace = std::getenv("CONTINUUM_LAB_TRACE");
  options.dump_trace = trace != nullptr && std::string(trace) == "1";
  return options;
}

clab::HostPool load_pool(const clab::ExperimentSpec& spec, const std::string& hosts_path) {
  if (hosts_path.empty()) return clab::synthesize_pool(spec);
  return clab::load_pool_file(hosts_path);
}

int report_violations(const std::vector<clab::Violation>& violations) {
  for (const clab::Violation& v : violations) std::cerr << clab::to_string(v) << '\n';
  return violations.empty() ? kExitOk : kExitValidation;
}

int cmd_validate(const std::string& spec_path) {
  clab::ExperimentSpec spec;
  try {
    spec = clab::load_spec_file(spec_path);
  } catch (const clab::Error& e) {
    std::cerr << e.what() << '\n';
    return exit_code_for(e);
  }
  return report_violations(clab::validate_spec(spec));
}

int cmd_run(const SpecSource& source, const std::string& hosts_path,
            std::optional<std::uint64_t> seed, const std::string& out_dir,
            const std::string& sample_interval, const std::string& placement) {
  clab::ExperimentSpec spec = source.load();
  if (seed) spec.master_seed = *seed;

  if (int rc = report_violations(clab::validate_spec(spec)); rc != kExitOk) return rc;

  clab::HostPool pool = load_pool(spec, hosts_path);
  if (int rc = report_violations(clab::check_capacity(spec, pool)); rc != kExitOk)
    return rc;

  clab::RunOptions options =
      run_options_from_env(clab::parse_duration_ns(sample_interval), placement);
  clab::ExperimentArchive archive = clab::run_experiment(spec, pool, out_dir, options);
  std::cout << archive.manifest.comparable_digest() << '\n';
  return kExitOk;
}

int cmd_diff(const std::string& dir_a, const std::string& dir_b) {
  clab::DiffResult diff = clab::verify_repeatability(clab::load_archive(dir_a),
                                                     clab::load_archive(dir_b));
  if (diff.identical) {
    std::cout << "IDENTICAL\n";
    return kExitOk;
  }
  std::cout << "DIVERGENT\n";
  for (const std::string& field : diff.differing_fields) std::cout << field << '\n';
  return kExitDiff;
}

int cmd_optimize(const SpecSource& source, const std::string& space_path,
                 const std::string& strategy, std::size_t budget,
                 const std::vector<std::string>& objective_args,
                 std::optional<std::uint64_t> seed, const std::string& out_dir,
                 const std::string& hosts_path, const std::string& sample_interval,
                 const std::string& placement) {
  clab::ExperimentSpec spec = source.load();
  if (int rc = report_violations(clab::validate_spec(spec)); rc != kExitOk) return rc;

  clab::ParameterSpace space = spec.parameters;
  if (!space_path.empty()) space = clab::load_spec_file(space_path).parameters;

  std::vector<clab::Objective> objectives;
  for (const std::string& arg : objective_args)
    objectives.push_back(clab::parse_objective(arg));

  clab::OptimizeOptions options;
  options.strategy = clab::parse_optimizer_strategy(strategy);
  options.budget = budget;
  options.run = run_options_from_env(clab::parse_duration_ns(sample_interval), placement);
  options.out_dir = out_dir;

  clab::HostPool pool = load_pool(spec, hosts_path);
  std::uint64_t master_seed = seed ? *seed : spec.master_seed;
  clab::OptimizationResult result =
      clab::optimize_loop(spec, pool, space, objectives, options, master_seed);
  clab::write_optimization_report(result, space, objectives, out_dir);

  if (result.best) {
    const clab::Evaluation& best = result.evaluations[*result.best];
    std::cout << "best";
    for (std::size_t i = 0; i < space.dimensions.size(); ++i)
      std::cout << ' ' << space.dimensions[i].first << '='
                << clab::param_value_str(best.point[i]);
    std::cout << '\n';
  } else {
    std::cout << "pareto " << result.pareto.size() << '\n';
  }
  return kExitOk;
}

int cmd_report(const std::string& archive_dir, const std::string& format) {
  clab::ExperimentArchive archive = clab::load_archive(archive_dir);
  clab::verify_archive(archive);

  if (format == "csv") {
    std::cout << "repetition,metric,count,min,max,mean,p50,p95,p99\n";
    for (const clab::RepetitionResult& rep : archive.results)
      for (const auto& [name, s] : rep.summaries)
        std::cout << rep.repetition_index << ',' << name << ',' << s.count << ','
                  << s.min.decimal_str() << ',' << s.max.decimal_str() << ','
                  << s.mean.decimal_str() << ',' << s.p50.decimal_str() << ','
                  << s.p95.decimal_str() << ',' << s.p99.decimal_str() << '\n';
    return kExitOk;
  }

  // json
  std::cout << "{\"repetitions\":[";
  for (std::size_t i = 0; i < archive.results.size(); ++i) {
    const clab::RepetitionResult& rep = archive.results[i];
    if (i > 0) std::cout << ',';
    std::cout << "{\"repetition_index\":" << rep.repetition_index
              << ",\"completed_records\":" << rep.completed_records
              << ",\"dropped\":" << rep.dropped << ",\"trace_digest\":\""
              << rep.trace_digest << "\",\"metrics\":{";
    bool first = true;
    for (const auto& [name, s] : rep.summaries) {
      if (!first) std::cout << ',';
      first = false;
      std::cout << '"' << name << "\":{\"count\":" << s.count << ",\"min\":\""
                << s.min.decimal_str() << "\",\"max\":\"" << s.max.decimal_str()
                << "\",\"mean\":\"" << s.mean.decimal_str() << "\",\"p50\":\""
                << s.p50.decimal_str() << "\",\"p95\":\"" << s.p95.decimal_str()
                << "\",\"p99\":\"" << s.p99.decimal_str() << "\"}";
    }
    std::cout << "}}";
  }
  std::cout << "]}\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continuum-lab: reproducible edge-to-cloud experiment runner"};
  app.require_subcommand(1);

  // validate
  auto* validate = app.add_subcommand("validate", "check an experiment file");
  std::string validate_path;
  validate->add_option("spec", validate_path, "experiment YAML file")->required();

  // run
  auto* run = app.add_subcommand("run", "execute an experiment and archive results");
  SpecSource run_source;
  std::string run_hosts, run_out, run_interval = "1s", run_placement = "round_robin";
  std::optional<std::uint64_t> run_seed;
  run->add_option("spec", run_source.path, "experiment YAML file");
  run->add_option("--preset", run_source.preset, "built-in scenario (cloud_centric|hybrid)");
  run->add_option("--hosts", run_hosts, "host pool YAML file");
  run->add_option("--seed", run_seed, "override the master seed");
  run->add_option("--out", run_out, "archive directory")->required();
  run->add_option("--sample-interval", run_interval, "monitor sampling interval");
  run->add_option("--placement", run_placement, "round_robin|first_fit");

  // diff
  auto* diff = app.add_subcommand("diff", "compare two archives for repeatability");
  std::string diff_a, diff_b;
  diff->add_option("archive_a", diff_a)->required();
  diff->add_option("archive_b", diff_b)->required();

  // optimize
  auto* optimize = app.add_subcommand("optimize", "search the parameter space");
  SpecSource opt_source;
  std::string opt_space, opt_strategy = "grid", opt_out, opt_hosts;
  std::string opt_interval = "1s", opt_placement = "round_robin";
  std::size_t opt_budget = 1;
  std::vector<std::string> opt_objectives;
  std::optional<std::uint64_t> opt_seed;
  optimize->add_option("spec", opt_source.path, "experiment YAML file");
  optimize->add_option("--preset", opt_source.preset,
                       "built-in scenario (cloud_centric|hybrid|quadratic)");
  optimize->add_option("--space", opt_space,
                       "YAML file with a top-level `parameters` map");
  optimize->add_option("--strategy", opt_strategy, "grid|random|surrogate");
  optimize->add_option("--budget", opt_budget, "number of evaluations")->required();
  optimize
      ->add_option("--objective", opt_objectives,
                   "metric:aggregator:direction[:weight] (repeatable)")
      ->required();
  optimize->add_option("--seed", opt_seed, "optimizer master seed");
  optimize->add_option("--out", opt_out, "report directory")->required();
  optimize->add_option("--hosts", opt_hosts, "host pool YAML file");
  optimize->add_option("--sample-interval", opt_interval, "monitor sampling interval");
  optimize->add_option("--placement", opt_placement, "round_robin|first_fit");

  // report
  auto* report = app.add_subcommand("report", "print metric summaries of an archive");
  std::string report_dir, report_format = "json";
  report->add_option("archive", report_dir)->required();
  report->add_option("--format", report_format, "json|csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(validate_path);
    if (run->parsed())
      return cmd_run(run_source, run_hosts, run_seed, run_out, run_interval,
                     run_placement);
    if (diff->parsed()) return cmd_diff(diff_a, diff_b);
    if (optimize->parsed())
      return cmd_optimize(opt_source, opt_space, opt_strategy, opt_budget,
                          opt_objectives, opt_seed, opt_out, opt_hosts, opt_interval,
                          opt_placement);
    if (report->parsed()) return cmd_report(report_dir, report_format);
  } catch (const clab::Error& e) {
    std::cerr << e.what() << '\n';
    if (e.code() == clab::Errc::corrupt_archive) std::cout << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
