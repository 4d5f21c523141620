#ifndef CLAB_ARCHIVE_HPP
#define CLAB_ARCHIVE_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "clab/emulator.hpp"
#include "clab/mapping.hpp"
#include "clab/monitor.hpp"
#include "clab/spec.hpp"

namespace clab {

inline constexpr const char* kToolVersion = "continuum-lab 0.1.0";

struct RepetitionResult {
  std::int64_t repetition_index = 0;
  std::string trace_digest;
  std::map<std::string, MetricSummary> summaries;
  std::string metrics_file;  // archive-relative reference
  std::int64_t completed_records = 0;
  std::int64_t dropped = 0;
};

struct ArchiveManifest {
  std::string spec_digest;
  std::string mapping_digest;
  std::string tool_version = kToolVersion;
  std::string created_label;  // wall clock; excluded from comparison
  std::uint64_t master_seed = 0;
  std::int64_t repetitions = 0;
  std::vector<std::string> trace_digests;
  std::map<std::string, std::string> file_digests;  // relative path -> sha256

  /// Digest over the run-identifying fields only (spec digest, seed,
  /// mapping digest, repetitions, trace digests); stable across reruns.
  std::string comparable_digest() const;
};

struct ExperimentArchive {
  std::filesystem::path root;
  ArchiveManifest manifest;
  std::vector<RepetitionResult> results;
};

struct RunOptions {
  std::int64_t sample_interval_ns = 1'000'000'000;
  bool dump_trace = false;
  MapStrategy strategy = MapStrategy::round_robin;
};

/// In-memory run of the whole campaign (no files written).
struct RunOutcome {
  Mapping mapping;
  std::string mapping_digest;
  std::vector<RepetitionResult> results;
  std::vector<std::vector<MetricSample>> samples;  // per repetition
  std::vector<std::string> traces;                 // empty unless dump_trace
};

RunOutcome run_experiment_core(const ExperimentSpec& spec, const HostPool& pool,
                               const RunOptions& options = {});

/// Persist a finished run as a self-verifying archive directory.
ExperimentArchive write_archive(const ExperimentSpec& spec, const RunOutcome& outcome,
                                const std::filesystem::path& out_dir,
                                const RunOptions& options = {});

/// Full cycle: repetitions, metrics files, manifest. The resulting
/// directory is self-verifying.
ExperimentArchive run_experiment(const ExperimentSpec& spec, const HostPool& pool,
                                 const std::filesystem::path& out_dir,
                                 const RunOptions& options = {});

ExperimentArchive load_archive(const std::filesystem::path& dir);

/// Recomputes every stored digest; throws Errc::corrupt_archive on any
/// mismatch or missing file.
void verify_archive(const ExperimentArchive& archive);

struct DiffResult {
  bool identical = true;
  std::vector<std::string> differing_fields;
};

/// Digest-level repeatability check. Both archives are integrity-verified
/// first (Errc::corrupt_archive propagates).
DiffResult verify_repeatability(const ExperimentArchive& a, const ExperimentArchive& b);

/// Shared by the runner and the optimizer's evaluation loop.
void execute_workflow(Emulator& em, const ExperimentSpec& spec);

}  // namespace clab

#endif  // CLAB_ARCHIVE_HPP
