#include "clab/emulator.hpp"

#include <algorithm>

namespace clab {

const char* event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::message_arrival: return "message_arrival";
    case EventKind::processing_done: return "processing_done";
    case EventKind::injection_tick: return "injection_tick";
    case EventKind::monitor_tick: return "monitor_tick";
    case EventKind::phase_boundary: return "phase_boundary";
  }
  return "?";
}

TransitResult link_transit(LinkState& link, const Message& msg, std::int64_t send_at_ns) {
  // loss draw happens on every transit so streams stay aligned when the
  // loss rate changes
  if (link.rng.bernoulli(link.rule.loss_rate)) return {false, 0};

  std::int64_t serialization_ns = 0;
  if (link.rule.bandwidth_bps)
    serialization_ns = ceil_div(static_cast<__int128>(msg.size_bits) * 1'000'000'000,
                                *link.rule.bandwidth_bps);
  std::int64_t start = std::max(send_at_ns, link.busy_until_ns);
  link.busy_until_ns = start + serialization_ns;

  std::int64_t jitter = 0;
  if (link.rule.jitter_ns > 0)
    jitter = static_cast<std::int64_t>(
        link.rng.next_below(static_cast<std::uint64_t>(link.rule.jitter_ns) + 1));

  return {true, start + serialization_ns + link.rule.delay_ns + jitter};
}

Emulator::Emulator(const ExperimentSpec& spec, const Mapping& mapping,
                   const HostPool& pool, std::int64_t repetition_index)
    : master_seed_(spec.master_seed), repetition_index_(repetition_index) {
  std::map<std::string, const ServiceDef*> services;
  std::map<std::string, const Layer*> layer_of_service;
  for (const Layer& layer : spec.layers)
    for (const ServiceDef& svc : layer.services) {
      services[svc.id] = &svc;
      layer_of_service[svc.id] = &layer;
    }
  std::map<std::string, const Host*> hosts;
  for (const Host& host : pool.hosts) hosts[host.id] = &host;

  for (const auto& [instance_id, host_id] : mapping.assignments) {
    std::string service_id = instance_id.substr(0, instance_id.rfind('.'));
    const ServiceDef* svc = services.at(service_id);
    auto rt = std::make_unique<InstanceRuntime>(InstanceRuntime{
        .instance_id = instance_id,
        .service_id = service_id,
        .layer = layer_of_service.at(service_id)->name,
        .host_id = host_id,
        .cpu_capacity = svc->cpu_capacity,
        .behavior = behaviors::registry().make(*svc),
        .rng = SplitMix64(hash64(master_seed_, "behavior", instance_id, repetition_index_)),
    });
    // physical capacity bounds logical demand
    if (auto it = hosts.find(host_id); it != hosts.end())
      rt->cpu_capacity = std::min(rt->cpu_capacity, it->second->cpu_capacity);
    by_id_[instance_id] = rt.get();
    by_service_[service_id].push_back(rt.get());
    instances_.push_back(std::move(rt));
  }

  for (const NetworkRule& rule : spec.network_rules) {
    auto add_link = [&](const std::string& src, const std::string& dst) {
      NetworkRule directed = rule;
      directed.src_layer = src;
      directed.dst_layer = dst;
      directed.symmetric = false;
      links_.emplace(std::make_pair(src, dst),
                     std::make_unique<LinkState>(LinkState{
                         src, dst, directed,
                         SplitMix64(hash64(master_seed_, "link", src, dst, repetition_index_)),
                         0}));
    };
    add_link(rule.src_layer, rule.dst_layer);
    if (rule.symmetric && rule.src_layer != rule.dst_layer)
      add_link(rule.dst_layer, rule.src_layer);
  }
}

InstanceRuntime& Emulator::instance(const std::string& instance_id) {
  auto it = by_id_.find(instance_id);
  if (it == by_id_.end())
    raise(Errc::invalid_argument, "no instance '" + instance_id + "'");
  return *it->second;
}

std::vector<const InstanceRuntime*> Emulator::instances_of(
    const std::string& service_id) const {
  std::vector<const InstanceRuntime*> out;
  if (auto it = by_service_.find(service_id); it != by_service_.end())
    out.assign(it->second.begin(), it->second.end());
  return out;
}

LinkState& Emulator::link_for(const std::string& src_layer, const std::string& dst_layer) {
  auto key = std::make_pair(src_layer, dst_layer);
  auto it = links_.find(key);
  if (it == links_.end()) {
    // no declared rule: ideal link (0 delay, unlimited bandwidth, no loss)
    NetworkRule ideal;
    ideal.src_layer = src_layer;
    ideal.dst_layer = dst_layer;
    ideal.symmetric = false;
    it = links_
             .emplace(key, std::make_unique<LinkState>(LinkState{
                               src_layer, dst_layer, ideal,
                               SplitMix64(hash64(master_seed_, "link", src_layer,
                                                 dst_layer, repetition_index_)),
                               0}))
             .first;
  }
  return *it->second;
}

void Emulator::push_event(SimEvent ev) {
  ev.seq = next_seq_++;
  events_.push(std::move(ev));
}

void Emulator::log_event(const SimEvent& ev) {
  std::string line = std::to_string(ev.fire_at_ns);
  line += '\t';
  line += event_kind_name(ev.kind);
  line += '\t';
  line += ev.instance.empty() ? "-" : ev.instance;
  line += '\t';
  line += std::to_string(ev.message ? ev.message->id : 0);
  line += '\n';
  trace_hash_.update(line);
  if (dump_trace_) trace_text_ += line;
}

void Emulator::mark_phase(const std::string& name) {
  push_event({.fire_at_ns = now_ns_, .kind = EventKind::phase_boundary, .instance = name});
}

void Emulator::launch(const std::optional<std::string>& service_id) {
  if (service_id && !by_service_.count(*service_id))
    raise(Errc::phase, "launch references unknown service '" + *service_id + "'");
  for (const auto& rt : instances_) {
    if (service_id && rt->service_id != *service_id) continue;
    if (rt->behavior->producer()) rt->behavior->on_launch(*this, *rt);
  }
}

void Emulator::inject(const std::string& phase_name, const std::string& target_service,
                      std::int64_t records, std::int64_t size_bits,
                      std::int64_t period_ns) {
  auto it = by_service_.find(target_service);
  if (it == by_service_.end())
    raise(Errc::phase,
          "phase '" + phase_name + "' references unknown service '" + target_service + "'");
  const auto& targets = it->second;
  for (std::int64_t k = 0; k < records; ++k) {
    std::int64_t at = now_ns_ + k * period_ns;
    Message msg;
    msg.id = ++next_msg_id_;
    msg.src_instance = "injector:" + phase_name;
    msg.dst_instance = targets[static_cast<std::size_t>(k % static_cast<std::int64_t>(
                                   targets.size()))]
                           ->instance_id;
    msg.size_bits = size_bits;
    msg.created_at_ns = at;
    ++sent_;
    ++in_flight_;
    push_event({.fire_at_ns = at,
                .kind = EventKind::message_arrival,
                .instance = msg.dst_instance,
                .message = std::move(msg)});
  }
}

void Emulator::send_message(InstanceRuntime& from, const std::string& target_service,
                            std::int64_t size_bits, std::int64_t created_at_ns,
                            const std::vector<Hop>& trace) {
  auto it = by_service_.find(target_service);
  if (it == by_service_.end())
    raise(Errc::phase, "service '" + from.service_id + "' sends to unknown service '" +
                           target_service + "'");
  const auto& targets = it->second;
  std::int64_t cursor = from.rr_cursor[target_service]++;
  const InstanceRuntime* target =
      targets[static_cast<std::size_t>(cursor % static_cast<std::int64_t>(targets.size()))];

  Message msg;
  msg.id = ++next_msg_id_;
  msg.src_instance = from.instance_id;
  msg.dst_instance = target->instance_id;
  msg.size_bits = size_bits;
  msg.created_at_ns = created_at_ns;
  msg.trace = trace;

  ++sent_;
  LinkState& link = link_for(from.layer, target->layer);
  TransitResult transit = link_transit(link, msg, now_ns_);
  if (!transit.delivered) {
    ++dropped_;
    return;
  }
  ++in_flight_;
  push_event({.fire_at_ns = transit.arrival_ns,
              .kind = EventKind::message_arrival,
              .instance = msg.dst_instance,
              .message = std::move(msg)});
}

void Emulator::record_completion(const InstanceRuntime& sink, const Message& msg) {
  ++completed_records_;
  samples_.push_back({now_ns_, sink.instance_id, kMetricE2eLatency,
                      Rational(now_ns_ - msg.created_at_ns)});
}

void Emulator::schedule_injection_tick(InstanceRuntime& self, std::int64_t fire_at_ns) {
  push_event({.fire_at_ns = fire_at_ns,
              .kind = EventKind::injection_tick,
              .instance = self.instance_id});
}

void Emulator::start_service(InstanceRuntime& runtime) {
  const Message& msg = runtime.queue.front().first;
  Rational units = runtime.behavior->service_units(msg);
  std::int64_t service_ns =
      ceil_div(static_cast<__int128>(units.num()) * 1'000'000'000 * runtime.cpu_capacity.den(),
               static_cast<__int128>(units.den()) * runtime.cpu_capacity.num());
  runtime.serving = true;
  runtime.service_started_ns = now_ns_;
  runtime.service_ends_ns = now_ns_ + service_ns;
  push_event({.fire_at_ns = runtime.service_ends_ns,
              .kind = EventKind::processing_done,
              .instance = runtime.instance_id});
}

void Emulator::process_message(InstanceRuntime& runtime, Message msg) {
  runtime.queue.emplace_back(std::move(msg), now_ns_);
  if (!runtime.serving) start_service(runtime);
}

void Emulator::complete_service(InstanceRuntime& runtime) {
  auto [msg, enter_ns] = std::move(runtime.queue.front());
  runtime.queue.pop_front();
  runtime.busy_accum_ns += now_ns_ - runtime.service_started_ns;
  runtime.processed_count += 1;
  runtime.serving = false;
  msg.trace.push_back({runtime.instance_id, enter_ns, now_ns_});

  runtime.behavior->on_processed(*this, runtime, msg);
  if (runtime.behavior->terminal()) record_completion(runtime, msg);
  if (!runtime.queue.empty()) start_service(runtime);
}

void Emulator::emit_monitor_samples() {
  for (const auto& rt : instances_) {
    samples_.push_back(
        {now_ns_, rt->instance_id, kMetricQueueLength, Rational(rt->queue_length())});
    std::int64_t busy = rt->busy_total(now_ns_);
    std::int64_t delta = busy - busy_at_last_tick_[rt->instance_id];
    busy_at_last_tick_[rt->instance_id] = busy;
    samples_.push_back({now_ns_, rt->instance_id, kMetricCpuUtilization,
                        Rational(delta, sample_interval_ns_)});
  }
}

void Emulator::schedule_ticks_until(std::int64_t until_ns) {
  if (sample_interval_ns_ <= 0) return;
  if (next_tick_ns_ == 0) next_tick_ns_ = sample_interval_ns_;
  while (next_tick_ns_ <= until_ns) {
    push_event({.fire_at_ns = next_tick_ns_, .kind = EventKind::monitor_tick});
    next_tick_ns_ += sample_interval_ns_;
  }
}

void Emulator::dispatch(SimEvent& ev) {
  now_ns_ = ev.fire_at_ns;
  log_event(ev);
  switch (ev.kind) {
    case EventKind::message_arrival: {
      --in_flight_;
      ++delivered_;
      process_message(instance(ev.instance), std::move(*ev.message));
      break;
    }
    case EventKind::processing_done:
      complete_service(instance(ev.instance));
      break;
    case EventKind::injection_tick: {
      InstanceRuntime& rt = instance(ev.instance);
      rt.behavior->on_injection_tick(*this, rt);
      break;
    }
    case EventKind::monitor_tick:
      emit_monitor_samples();
      break;
    case EventKind::phase_boundary:
      break;
  }
}

void Emulator::run_queue(std::optional<std::int64_t> until_ns) {
  while (!events_.empty()) {
    if (until_ns && events_.top().fire_at_ns > *until_ns) break;
    SimEvent ev = events_.top();
    events_.pop();
    dispatch(ev);
  }
}

std::string Emulator::advance(std::int64_t until_ns) {
  if (until_ns < now_ns_)
    raise(Errc::invalid_argument, "advance target precedes the clock");
  schedule_ticks_until(until_ns);
  run_queue(until_ns);
  now_ns_ = until_ns;
  return trace_digest();
}

void Emulator::drain() {
  run_queue(std::nullopt);
}

void Emulator::finish() {
  samples_.push_back({now_ns_, "global", kMetricDropped, Rational(dropped_)});
  if (now_ns_ > 0)
    samples_.push_back({now_ns_, "global", kMetricThroughput,
                        Rational(completed_records_ * 1'000'000'000, now_ns_)});
}

}  // namespace clab
