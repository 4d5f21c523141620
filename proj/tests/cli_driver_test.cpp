// Integration tests driving the continuum-lab binary end to end.
// CONTINUUM_LAB_BIN must point at the built executable.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "test_util.hpp"

namespace {

int g_failures = 0;

#define CHECK_TRUE(cond)                                                      \
  do {                                                                        \
    if (!(cond)) {                                                            \
      std::cerr << "FAILED at " << __LINE__ << ": " #cond "\n";               \
      ++g_failures;                                                           \
    }                                                                         \
  } while (0)

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path g_scratch;

CmdResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  const char* bin = std::getenv("CONTINUUM_LAB_BIN");
  if (!bin) {
    std::cerr << "CONTINUUM_LAB_BIN is not set\n";
    std::exit(2);
  }
  auto out_path = g_scratch / "cmd.out";
  auto err_path = g_scratch / "cmd.err";
  std::string cmd = env_prefix + std::string(bin) + " " + args + " >" +
                    out_path.string() + " 2>" + err_path.string();
  int status = std::system(cmd.c_str());
  CmdResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_all(out_path);
  result.err = read_all(err_path);
  return result;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

std::string last_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  return last;
}

const char* kValidSpec = R"(
name: cli-fixture
seed: 5
layers:
  - name: edge
    services:
      - {id: cam, kind: source, params: {target: store, size_bits: "1000", period_ns: 20ms, records: "5"}}
  - name: cloud
    services:
      - {id: store, kind: sink}
network:
  - {src: edge, dst: cloud, delay: 5ms, jitter: 1ms, loss: 0.05}
workflow:
  - {name: go, kind: launch}
  - {name: stop, kind: wait_until, args: {sim_time_ns: 500ms}}
)";

const char* kBadLossSpec = R"(
name: bad-loss
layers: [{name: edge, services: []}]
network: [{src: edge, dst: edge, loss: 2}]
)";

void test_validate() {
  write_file(g_scratch / "valid.yaml", kValidSpec);
  CmdResult ok = run_cli("validate " + (g_scratch / "valid.yaml").string());
  CHECK_TRUE(ok.exit_code == 0);
  CHECK_TRUE(ok.err.empty());

  write_file(g_scratch / "bad.yaml", kBadLossSpec);
  CmdResult bad = run_cli("validate " + (g_scratch / "bad.yaml").string());
  CHECK_TRUE(bad.exit_code == 2);
  CHECK_TRUE(bad.err.find("LossOutOfRange") != std::string::npos);

  CmdResult missing = run_cli("validate " + (g_scratch / "nope.yaml").string());
  CHECK_TRUE(missing.exit_code == 3);
}

void test_run_and_diff() {
  std::string spec = (g_scratch / "valid.yaml").string();
  CmdResult a = run_cli("run " + spec + " --out " + (g_scratch / "arch-a").string());
  CmdResult b = run_cli("run " + spec + " --out " + (g_scratch / "arch-b").string());
  CHECK_TRUE(a.exit_code == 0);
  CHECK_TRUE(b.exit_code == 0);
  // final stdout line is the manifest digest, stable across runs
  CHECK_TRUE(last_line(a.out).size() == 64);
  CHECK_TRUE(last_line(a.out) == last_line(b.out));

  CmdResult diff = run_cli("diff " + (g_scratch / "arch-a").string() + " " +
                           (g_scratch / "arch-b").string());
  CHECK_TRUE(diff.exit_code == 0);
  CHECK_TRUE(diff.out.find("IDENTICAL") != std::string::npos);

  // seed override diverges on the seed field
  CmdResult c = run_cli("run " + spec + " --seed 99 --out " + (g_scratch / "arch-c").string());
  CHECK_TRUE(c.exit_code == 0);
  CmdResult diverged = run_cli("diff " + (g_scratch / "arch-a").string() + " " +
                               (g_scratch / "arch-c").string());
  CHECK_TRUE(diverged.exit_code == 4);
  CHECK_TRUE(diverged.out.find("manifest.master_seed") != std::string::npos);
}

void test_run_preset_and_trace() {
  CmdResult preset = run_cli("run --preset hybrid --out " + (g_scratch / "preset").string());
  CHECK_TRUE(preset.exit_code == 0);

  CmdResult traced = run_cli("run --preset hybrid --out " + (g_scratch / "traced").string(),
                             "CONTINUUM_LAB_TRACE=1 ");
  CHECK_TRUE(traced.exit_code == 0);
  CHECK_TRUE(std::filesystem::exists(g_scratch / "traced" / "rep_0" / "trace.log"));

  CmdResult unknown = run_cli("run --preset centralised --out " + (g_scratch / "x").string());
  CHECK_TRUE(unknown.exit_code == 2);
}

void test_run_rejects_invalid_before_writing() {
  CmdResult bad = run_cli("run " + (g_scratch / "bad.yaml").string() + " --out " +
                          (g_scratch / "never").string());
  CHECK_TRUE(bad.exit_code == 2);
  CHECK_TRUE(!std::filesystem::exists(g_scratch / "never"));
}

void test_tamper_detection() {
  std::string archive = (g_scratch / "arch-a").string();
  auto metrics = g_scratch / "arch-a" / "rep_0" / "metrics.csv";
  std::string original = read_all(metrics);
  std::string mutated = original;
  mutated[10] = static_cast<char>(mutated[10] ^ 0x01);
  write_file(metrics, mutated);

  CmdResult diff = run_cli("diff " + archive + " " + (g_scratch / "arch-b").string());
  CHECK_TRUE(diff.exit_code == 4);
  CHECK_TRUE(diff.out.find("CorruptArchive") != std::string::npos);

  CmdResult report = run_cli("report " + archive);
  CHECK_TRUE(report.exit_code == 4);

  write_file(metrics, original);
}

void test_report_formats() {
  std::string archive = (g_scratch / "arch-a").string();
  CmdResult json = run_cli("report " + archive + " --format json");
  CHECK_TRUE(json.exit_code == 0);
  CHECK_TRUE(json.out.find("\"repetitions\"") != std::string::npos);

  CmdResult csv = run_cli("report " + archive + " --format csv");
  CHECK_TRUE(csv.exit_code == 0);
  CHECK_TRUE(csv.out.rfind("repetition,metric,count,min,max,mean,p50,p95,p99", 0) == 0);
}

void test_optimize() {
  write_file(g_scratch / "space.yaml", "parameters:\n  a: [2, 3]\n  b: [4, 5]\n");
  CmdResult grid = run_cli(
      "optimize --preset quadratic --space " + (g_scratch / "space.yaml").string() +
      " --strategy grid --budget 4 --objective e2e_latency_ns:mean:minimize --out " +
      (g_scratch / "opt").string());
  CHECK_TRUE(grid.exit_code == 0);
  CHECK_TRUE(last_line(grid.out) == "best a=3 b=4");

  std::string csv = read_all(g_scratch / "opt" / "evaluations.csv");
  int rows = 0;
  for (char ch : csv)
    if (ch == '\n') ++rows;
  CHECK_TRUE(rows == 5);  // header + 4 evaluations
  CHECK_TRUE(std::filesystem::exists(g_scratch / "opt" / "optimization.json"));
  CHECK_TRUE(std::filesystem::exists(g_scratch / "opt" / "eval_0" / "manifest.json"));

  CmdResult unknown_metric = run_cli(
      "optimize --preset quadratic --strategy grid --budget 4 --objective "
      "memory:mean:minimize --out " +
      (g_scratch / "opt2").string());
  CHECK_TRUE(unknown_metric.exit_code == 2);

  CmdResult surrogate = run_cli(
      "optimize --preset quadratic --strategy surrogate --budget 60 --seed 424242 "
      "--objective e2e_latency_ns:mean:minimize --out " +
      (g_scratch / "opt3").string());
  CHECK_TRUE(surrogate.exit_code == 0);
  CHECK_TRUE(last_line(surrogate.out) == "best a=3 b=4");
}

}  // namespace

int main() {
  g_scratch = clab::testutil::scratch_dir("cli");

  test_validate();
  test_run_and_diff();
  test_run_preset_and_trace();
  test_run_rejects_invalid_before_writing();
  test_tamper_detection();
  test_report_formats();
  test_optimize();

  std::filesystem::remove_all(g_scratch);
  if (g_failures > 0) {
    std::cerr << g_failures << " CLI check(s) failed\n";
    return 1;
  }
  std::cout << "all CLI checks passed\n";
  return 0;
}
