#include "clab/archive.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "clab/sha256.hpp"

namespace clab {

using json = nlohmann::json;

namespace {

std::string now_label() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io, "cannot write " + path.string());
  out << content;
  if (!out) raise(Errc::io, "write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::int64_t phase_count_arg(const WorkflowPhase& phase, const char* key,
                             std::int64_t fallback) {
  auto it = phase.args.find(key);
  return it == phase.args.end() ? fallback : parse_count(it->second, key);
}

json summary_json(const MetricSummary& s) {
  return {{"count", s.count},
          {"max", s.max.decimal_str()},
          {"mean", s.mean.decimal_str()},
          {"min", s.min.decimal_str()},
          {"p50", s.p50.decimal_str()},
          {"p95", s.p95.decimal_str()},
          {"p99", s.p99.decimal_str()}};
}

MetricSummary summary_from_json(const std::string& metric, const json& j) {
  MetricSummary s;
  s.metric = metric;
  s.count = j.at("count").get<std::int64_t>();
  s.min = Rational::parse(j.at("min").get<std::string>());
  s.max = Rational::parse(j.at("max").get<std::string>());
  s.mean = Rational::parse(j.at("mean").get<std::string>());
  s.p50 = Rational::parse(j.at("p50").get<std::string>());
  s.p95 = Rational::parse(j.at("p95").get<std::string>());
  s.p99 = Rational::parse(j.at("p99").get<std::string>());
  return s;
}

std::string rep_dir_name(std::int64_t k) { return "rep_" + std::to_string(k); }

}  // namespace

void execute_workflow(Emulator& em, const ExperimentSpec& spec) {
  for (const WorkflowPhase& phase : spec.workflow) {
    em.mark_phase(phase.name);
    switch (phase.kind) {
      case WorkflowPhase::Kind::launch: {
        std::optional<std::string> service;
        if (auto it = phase.args.find("service"); it != phase.args.end())
          service = it->second;
        em.launch(service);
        break;
      }
      case WorkflowPhase::Kind::inject: {
        auto target = phase.args.find("target");
        if (target == phase.args.end())
          raise(Errc::phase, "phase '" + phase.name + "' has no target service");
        std::int64_t period = 0;
        if (auto it = phase.args.find("period_ns"); it != phase.args.end())
          period = parse_duration_ns(it->second);
        em.inject(phase.name, target->second, phase_count_arg(phase, "records", 1),
                  phase_count_arg(phase, "size_bits", 1), period);
        break;
      }
      case WorkflowPhase::Kind::wait_until:
        em.advance(parse_duration_ns(phase.args.at("sim_time_ns")));
        break;
      case WorkflowPhase::Kind::gather:
        em.drain();
        break;
    }
  }
  em.finish();
}

RunOutcome run_experiment_core(const ExperimentSpec& spec, const HostPool& pool,
                               const RunOptions& options) {
  if (auto violations = validate_spec(spec); !violations.empty())
    raise(Errc::invalid_argument, "spec invalid: " + to_string(violations.front()));
  for (const Violation& v : check_capacity(spec, pool))
    raise(v.code == Violation::Code::missing_layer_hosts ? Errc::missing_layer_hosts
                                                         : Errc::capacity_exceeded,
          v.message);

  RunOutcome outcome;
  outcome.mapping = resolve_mapping(spec, pool, options.strategy);
  outcome.mapping_digest = mapping_digest(outcome.mapping);

  for (std::int64_t rep = 0; rep < spec.repetitions; ++rep) {
    Emulator em(spec, outcome.mapping, pool, rep);
    em.set_sample_interval(options.sample_interval_ns);
    em.enable_trace_dump(options.dump_trace);
    execute_workflow(em, spec);

    RepetitionResult result;
    result.repetition_index = rep;
    result.trace_digest = em.trace_digest();
    result.completed_records = em.completed_records();
    result.dropped = em.messages_dropped();
    result.metrics_file = rep_dir_name(rep) + "/metrics.csv";
    for (const std::string& metric : metrics_present(em.samples()))
      result.summaries[metric] = summarize(em.samples(), metric);

    outcome.samples.push_back(em.samples());
    outcome.traces.push_back(em.trace_text());
    outcome.results.push_back(std::move(result));
  }
  return outcome;
}

std::string ArchiveManifest::comparable_digest() const {
  json j = {{"mapping_digest", mapping_digest},
            {"master_seed", master_seed},
            {"repetitions", repetitions},
            {"spec_digest", spec_digest},
            {"trace_digests", trace_digests}};
  return Sha256::hex_of(j.dump());
}

ExperimentArchive write_archive(const ExperimentSpec& spec, const RunOutcome& outcome,
                                const std::filesystem::path& out_dir,
                                const RunOptions& options) {
  ExperimentArchive archive;
  archive.root = out_dir;
  std::filesystem::create_directories(out_dir);

  ArchiveManifest& manifest = archive.manifest;
  manifest.spec_digest = canonical_digest(spec);
  manifest.mapping_digest = outcome.mapping_digest;
  manifest.master_seed = spec.master_seed;
  manifest.repetitions = spec.repetitions;
  manifest.created_label = now_label();

  std::string canonical = canonical_spec(spec);
  write_file(out_dir / "spec.canonical", canonical);
  manifest.file_digests["spec.canonical"] = Sha256::hex_of(canonical);

  for (std::size_t i = 0; i < outcome.results.size(); ++i) {
    const RepetitionResult& result = outcome.results[i];
    std::string rep_dir = rep_dir_name(result.repetition_index);
    std::filesystem::create_directories(out_dir / rep_dir);

    std::ostringstream csv;
    write_metrics_csv(csv, outcome.samples[i]);
    write_file(out_dir / result.metrics_file, csv.str());
    manifest.file_digests[result.metrics_file] = Sha256::hex_of(csv.str());

    if (options.dump_trace) {
      std::string trace_path = rep_dir + "/trace.log";
      write_file(out_dir / trace_path, outcome.traces[i]);
      manifest.file_digests[trace_path] = Sha256::hex_of(outcome.traces[i]);
    }

    json rj = {{"completed_records", result.completed_records},
               {"dropped", result.dropped},
               {"metrics_file", result.metrics_file},
               {"repetition_index", result.repetition_index},
               {"trace_digest", result.trace_digest}};
    json metrics = json::object();
    for (const auto& [name, summary] : result.summaries)
      metrics[name] = summary_json(summary);
    rj["metrics"] = std::move(metrics);
    std::string result_text = rj.dump(2) + "\n";
    std::string result_path = rep_dir + "/result.json";
    write_file(out_dir / result_path, result_text);
    manifest.file_digests[result_path] = Sha256::hex_of(result_text);

    manifest.trace_digests.push_back(result.trace_digest);
  }

  json mj = {{"created", manifest.created_label},
             {"files", json(manifest.file_digests)},
             {"manifest_digest", manifest.comparable_digest()},
             {"mapping_digest", manifest.mapping_digest},
             {"master_seed", manifest.master_seed},
             {"repetitions", manifest.repetitions},
             {"spec_digest", manifest.spec_digest},
             {"tool_version", manifest.tool_version},
             {"trace_digests", manifest.trace_digests}};
  write_file(out_dir / "manifest.json", mj.dump(2) + "\n");

  archive.results = outcome.results;
  return archive;
}

ExperimentArchive run_experiment(const ExperimentSpec& spec, const HostPool& pool,
                                 const std::filesystem::path& out_dir,
                                 const RunOptions& options) {
  return write_archive(spec, run_experiment_core(spec, pool, options), out_dir, options);
}

ExperimentArchive load_archive(const std::filesystem::path& dir) {
  ExperimentArchive archive;
  archive.root = dir;

  json mj;
  try {
    mj = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    raise(Errc::corrupt_archive, "manifest.json: " + std::string(e.what()));
  }
  try {
    ArchiveManifest& m = archive.manifest;
    m.created_label = mj.at("created").get<std::string>();
    m.spec_digest = mj.at("spec_digest").get<std::string>();
    m.mapping_digest = mj.at("mapping_digest").get<std::string>();
    m.master_seed = mj.at("master_seed").get<std::uint64_t>();
    m.repetitions = mj.at("repetitions").get<std::int64_t>();
    m.tool_version = mj.at("tool_version").get<std::string>();
    m.trace_digests = mj.at("trace_digests").get<std::vector<std::string>>();
    m.file_digests =
        mj.at("files").get<std::map<std::string, std::string>>();

    for (std::int64_t rep = 0; rep < m.repetitions; ++rep) {
      json rj = json::parse(read_file(dir / rep_dir_name(rep) / "result.json"));
      RepetitionResult result;
      result.repetition_index = rj.at("repetition_index").get<std::int64_t>();
      result.trace_digest = rj.at("trace_digest").get<std::string>();
      result.completed_records = rj.at("completed_records").get<std::int64_t>();
      result.dropped = rj.at("dropped").get<std::int64_t>();
      result.metrics_file = rj.at("metrics_file").get<std::string>();
      for (const auto& [name, sj] : rj.at("metrics").items())
        result.summaries[name] = summary_from_json(name, sj);
      archive.results.push_back(std::move(result));
    }
  } catch (const json::exception& e) {
    raise(Errc::corrupt_archive, dir.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::io) raise(Errc::corrupt_archive, e.what());
    throw;
  }
  return archive;
}

void verify_archive(const ExperimentArchive& archive) {
  const ArchiveManifest& m = archive.manifest;

  for (const auto& [rel_path, recorded] : m.file_digests) {
    std::filesystem::path path = archive.root / rel_path;
    if (!std::filesystem::exists(path))
      raise(Errc::corrupt_archive, rel_path + ": file missing");
    if (Sha256::hex_of_file(path) != recorded)
      raise(Errc::corrupt_archive, rel_path + ": digest mismatch");
  }

  if (!m.file_digests.count("spec.canonical"))
    raise(Errc::corrupt_archive, "spec.canonical not covered by manifest");
  if (Sha256::hex_of(read_file(archive.root / "spec.canonical")) != m.spec_digest)
    raise(Errc::corrupt_archive, "spec.canonical: spec digest mismatch");

  if (static_cast<std::int64_t>(m.trace_digests.size()) != m.repetitions ||
      static_cast<std::int64_t>(archive.results.size()) != m.repetitions)
    raise(Errc::corrupt_archive, "repetition count mismatch");

  for (std::size_t i = 0; i < archive.results.size(); ++i) {
    const RepetitionResult& result = archive.results[i];
    if (result.trace_digest != m.trace_digests[i])
      raise(Errc::corrupt_archive,
            rep_dir_name(result.repetition_index) + "/result.json: trace digest mismatch");
    // trace.log, when dumped, is the exact preimage of the trace digest
    std::string trace_rel = rep_dir_name(result.repetition_index) + "/trace.log";
    if (m.file_digests.count(trace_rel)) {
      if (Sha256::hex_of(read_file(archive.root / trace_rel)) != result.trace_digest)
        raise(Errc::corrupt_archive, trace_rel + ": trace does not match its digest");
    }
  }

  json mj;
  try {
    mj = json::parse(read_file(archive.root / "manifest.json"));
  } catch (const json::exception& e) {
    raise(Errc::corrupt_archive, "manifest.json: " + std::string(e.what()));
  }
  if (mj.at("manifest_digest").get<std::string>() != m.comparable_digest())
    raise(Errc::corrupt_archive, "manifest.json: manifest digest mismatch");
}

DiffResult verify_repeatability(const ExperimentArchive& a, const ExperimentArchive& b) {
  verify_archive(a);
  verify_archive(b);

  DiffResult diff;
  auto differ = [&](const std::string& field) {
    diff.identical = false;
    diff.differing_fields.push_back(field);
  };

  if (a.manifest.spec_digest != b.manifest.spec_digest) differ("manifest.spec_digest");
  if (a.manifest.master_seed != b.manifest.master_seed) differ("manifest.master_seed");
  if (a.manifest.mapping_digest != b.manifest.mapping_digest)
    differ("manifest.mapping_digest");
  if (a.manifest.repetitions != b.manifest.repetitions) differ("manifest.repetitions");

  std::size_t common =
      std::min(a.manifest.trace_digests.size(), b.manifest.trace_digests.size());
  for (std::size_t i = 0; i < common; ++i)
    if (a.manifest.trace_digests[i] != b.manifest.trace_digests[i])
      differ("repetitions[" + std::to_string(i) + "].trace_digest");

  return diff;
}

}  // namespace clab
