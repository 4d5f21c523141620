#ifndef CLAB_EMULATOR_HPP
#define CLAB_EMULATOR_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "clab/behavior.hpp"
#include "clab/mapping.hpp"
#include "clab/monitor.hpp"
#include "clab/rng.hpp"
#include "clab/sha256.hpp"
#include "clab/spec.hpp"

namespace clab {

struct Hop {
  std::string instance;
  std::int64_t enter_ns = 0;
  std::int64_t exit_ns = 0;

  bool operator==(const Hop&) const = default;
};

struct Message {
  std::int64_t id = 0;
  std::string src_instance;
  std::string dst_instance;
  std::int64_t size_bits = 1;
  std::int64_t created_at_ns = 0;  // birth of the originating record
  std::vector<Hop> trace;
};

enum class EventKind {
  message_arrival,
  processing_done,
  injection_tick,
  monitor_tick,
  phase_boundary,
};

const char* event_kind_name(EventKind kind);

struct SimEvent {
  std::int64_t fire_at_ns = 0;
  std::uint64_t seq = 0;  // tie-break: scheduling order
  EventKind kind = EventKind::monitor_tick;
  std::string instance;  // target instance, phase label, or empty
  std::optional<Message> message;
};

/// Directed shaped pipe between two layers. Owns its PRNG stream; one loss
/// draw per transit, plus one jitter draw when jitter_ns > 0.
struct LinkState {
  std::string src_layer;
  std::string dst_layer;
  NetworkRule rule;
  SplitMix64 rng;
  std::int64_t busy_until_ns = 0;
};

struct TransitResult {
  bool delivered = false;
  std::int64_t arrival_ns = 0;
};

/// Pipe model: serialization = ceil(size_bits * 1e9 / bandwidth), start =
/// max(send_at, busy_until), arrival = start + serialization + delay +
/// jitter draw in [0, jitter_ns].
TransitResult link_transit(LinkState& link, const Message& msg, std::int64_t send_at_ns);

struct InstanceRuntime {
  std::string instance_id;
  std::string service_id;
  std::string layer;
  std::string host_id;
  Rational cpu_capacity;  // min(service, host)
  std::unique_ptr<Behavior> behavior;
  SplitMix64 rng;  // behavior stream

  // single-server FIFO; front is in service while `serving`
  std::deque<std::pair<Message, std::int64_t>> queue;  // (message, enter_ns)
  bool serving = false;
  std::int64_t service_started_ns = 0;
  std::int64_t service_ends_ns = 0;
  std::int64_t busy_accum_ns = 0;
  std::int64_t processed_count = 0;

  // producer bookkeeping
  std::int64_t emitted = 0;
  std::map<std::string, std::int64_t> rr_cursor;  // per-target round robin

  std::int64_t queue_length() const { return static_cast<std::int64_t>(queue.size()); }
  std::int64_t busy_total(std::int64_t now_ns) const {
    return busy_accum_ns + (serving ? now_ns - service_started_ns : 0);
  }
};

/// One provisioned deployment: instances + links + clock + event queue.
/// Strictly single-threaded; independent deployments may run concurrently.
/// Self-contained after construction (no references into spec or pool).
class Emulator {
 public:
  /// provision: one runtime per assignment, one directed link per expanded
  /// network rule, clock 0. Throws Errc::unknown_behavior.
  Emulator(const ExperimentSpec& spec, const Mapping& mapping, const HostPool& pool,
           std::int64_t repetition_index);

  // --- workflow-facing operations -----------------------------------
  void mark_phase(const std::string& name);
  /// Launch producers (all of them, or one service's instances).
  void launch(const std::optional<std::string>& service_id);
  /// External arrivals: `records` messages of `size_bits` spread
  /// `period_ns` apart, round-robin over the target's instances.
  void inject(const std::string& phase_name, const std::string& target_service,
              std::int64_t records, std::int64_t size_bits, std::int64_t period_ns);
  /// Pop events in (fire_at, seq) order up to until_ns; clock = until_ns.
  /// Returns the running trace digest (hex).
  std::string advance(std::int64_t until_ns);
  /// Run to quiescence: processes every remaining event.
  void drain();
  /// Emit end-of-run metrics (throughput_rps, messages_dropped).
  void finish();

  // --- behavior-facing operations -----------------------------------
  /// Route one message from a running instance to a service, picking the
  /// declared (or ideal) link for the layer pair.
  void send_message(InstanceRuntime& from, const std::string& target_service,
                    std::int64_t size_bits, std::int64_t created_at_ns,
                    const std::vector<Hop>& trace);
  /// Sinks call this when a record finishes processing.
  void record_completion(const InstanceRuntime& sink, const Message& msg);
  void schedule_injection_tick(InstanceRuntime& self, std::int64_t fire_at_ns);

  // --- monitoring ----------------------------------------------------
  void set_sample_interval(std::int64_t interval_ns) { sample_interval_ns_ = interval_ns; }
  void enable_trace_dump(bool on) { dump_trace_ = on; }

  // --- accessors ------------------------------------------------------
  std::int64_t now_ns() const { return now_ns_; }
  std::string trace_digest() const { return trace_hash_.hex(); }
  const std::string& trace_text() const { return trace_text_; }
  const std::vector<MetricSample>& samples() const { return samples_; }
  std::int64_t completed_records() const { return completed_records_; }
  std::int64_t messages_sent() const { return sent_; }
  std::int64_t messages_delivered() const { return delivered_; }
  std::int64_t messages_dropped() const { return dropped_; }
  std::int64_t messages_in_flight() const { return in_flight_; }

  InstanceRuntime& instance(const std::string& instance_id);
  const std::vector<std::unique_ptr<InstanceRuntime>>& instances() const {
    return instances_;
  }
  std::vector<const InstanceRuntime*> instances_of(const std::string& service_id) const;
  std::size_t link_count() const { return links_.size(); }

  /// Spec-level arrival handling: enqueue, start service if idle.
  void process_message(InstanceRuntime& runtime, Message msg);

 private:
  struct EventOrder {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.fire_at_ns != b.fire_at_ns) return a.fire_at_ns > b.fire_at_ns;
      return a.seq > b.seq;
    }
  };

  void push_event(SimEvent ev);
  void dispatch(SimEvent& ev);
  void log_event(const SimEvent& ev);
  void start_service(InstanceRuntime& runtime);
  void complete_service(InstanceRuntime& runtime);
  LinkState& link_for(const std::string& src_layer, const std::string& dst_layer);
  void emit_monitor_samples();
  void schedule_ticks_until(std::int64_t until_ns);
  void run_queue(std::optional<std::int64_t> until_ns);

  std::uint64_t master_seed_;
  std::int64_t repetition_index_;

  std::int64_t now_ns_ = 0;
  std::uint64_t next_seq_ = 0;
  std::int64_t next_msg_id_ = 0;
  std::priority_queue<SimEvent, std::vector<SimEvent>, EventOrder> events_;

  std::vector<std::unique_ptr<InstanceRuntime>> instances_;
  std::map<std::string, InstanceRuntime*> by_id_;
  std::map<std::string, std::vector<InstanceRuntime*>> by_service_;
  std::map<std::pair<std::string, std::string>, std::unique_ptr<LinkState>> links_;

  Sha256 trace_hash_;
  bool dump_trace_ = false;
  std::string trace_text_;

  std::int64_t sample_interval_ns_ = 0;  // 0 = no periodic sampling
  std::int64_t next_tick_ns_ = 0;
  std::map<std::string, std::int64_t> busy_at_last_tick_;
  std::vector<MetricSample> samples_;

  std::int64_t completed_records_ = 0;
  std::int64_t sent_ = 0;
  std::int64_t delivered_ = 0;
  std::int64_t dropped_ = 0;
  std::int64_t in_flight_ = 0;
};

}  // namespace clab

#endif  // CLAB_EMULATOR_HPP
