#include "clab/behavior.hpp"

#include "clab/emulator.hpp"

namespace clab {

Rational Behavior::service_units(const Message& msg) const {
  return base_units_ + per_bit_units_ * Rational(msg.size_bits);
}

void Behavior::on_launch(Emulator&, InstanceRuntime&) {}
void Behavior::on_injection_tick(Emulator&, InstanceRuntime&) {}
void Behavior::on_processed(Emulator&, InstanceRuntime&, const Message&) {}

namespace behaviors {

namespace {

const std::string* find_param(const ServiceDef& svc, const std::string& key) {
  auto it = svc.params.find(key);
  return it == svc.params.end() ? nullptr : &it->second;
}

std::string require_param(const ServiceDef& svc, const std::string& key) {
  const std::string* v = find_param(svc, key);
  if (!v)
    raise(Errc::schema,
          "service '" + svc.id + "' (" + svc.kind + ") needs param '" + key + "'");
  return *v;
}

Rational rational_param(const ServiceDef& svc, const std::string& key,
                        const Rational& fallback) {
  const std::string* v = find_param(svc, key);
  return v ? Rational::parse(*v) : fallback;
}

std::int64_t count_param(const ServiceDef& svc, const std::string& key,
                         std::int64_t fallback) {
  const std::string* v = find_param(svc, key);
  return v ? parse_count(*v, key.c_str()) : fallback;
}

class SourceBehavior : public Behavior {
 public:
  explicit SourceBehavior(const ServiceDef& svc)
      : target_(require_param(svc, "target")),
        size_bits_(count_param(svc, "size_bits", 1)),
        period_ns_(parse_duration_ns(require_param(svc, "period_ns"))),
        records_(count_param(svc, "records", 1)) {
    base_units_ = rational_param(svc, "base_units", Rational(0));
    per_bit_units_ = rational_param(svc, "per_bit_units", Rational(0));
    if (size_bits_ < 1)
      raise(Errc::schema, "service '" + svc.id + "': size_bits must be >= 1");
    if (period_ns_ <= 0)
      raise(Errc::schema, "service '" + svc.id + "': period_ns must be > 0");
  }

  bool producer() const override { return true; }

  void on_launch(Emulator& em, InstanceRuntime& self) override {
    if (records_ > 0) em.schedule_injection_tick(self, em.now_ns());
  }

  void on_injection_tick(Emulator& em, InstanceRuntime& self) override {
    if (self.emitted >= records_) return;
    std::vector<Hop> birth{{self.instance_id, em.now_ns(), em.now_ns()}};
    em.send_message(self, target_, size_bits_, em.now_ns(), birth);
    self.emitted += 1;
    if (self.emitted < records_)
      em.schedule_injection_tick(self, em.now_ns() + period_ns_);
  }

 private:
  std::string target_;
  std::int64_t size_bits_;
  std::int64_t period_ns_;
  std::int64_t records_;
};

class TransformBehavior : public Behavior {
 public:
  explicit TransformBehavior(const ServiceDef& svc)
      : target_(require_param(svc, "target")),
        size_multiplier_(rational_param(svc, "size_multiplier", Rational(1))) {
    base_units_ = rational_param(svc, "base_units", Rational(0));
    per_bit_units_ = rational_param(svc, "per_bit_units", Rational(0));
    if (!(size_multiplier_ > Rational(0)) || size_multiplier_ > Rational(1))
      raise(Errc::schema, "service '" + svc.id + "': size_multiplier must be in (0,1]");
  }

  void on_processed(Emulator& em, InstanceRuntime& self, const Message& msg) override {
    std::int64_t out_bits = (size_multiplier_ * Rational(msg.size_bits)).ceil();
    em.send_message(self, target_, out_bits, msg.created_at_ns, msg.trace);
  }

 private:
  std::string target_;
  Rational size_multiplier_;
};

class SinkBehavior : public Behavior {
 public:
  explicit SinkBehavior(const ServiceDef& svc) {
    base_units_ = rational_param(svc, "base_units", Rational(0));
    per_bit_units_ = rational_param(svc, "per_bit_units", Rational(0));
  }

  bool terminal() const override { return true; }
};

/// Terminal probe whose cost is (a-center_a)^2 + (b-center_b)^2 service
/// units, independent of the message. Drives optimizer benchmarks.
class QuadraticSinkBehavior : public Behavior {
 public:
  explicit QuadraticSinkBehavior(const ServiceDef& svc) {
    Rational a = Rational::parse(require_param(svc, "a"));
    Rational b = Rational::parse(require_param(svc, "b"));
    Rational ca = rational_param(svc, "center_a", Rational(3));
    Rational cb = rational_param(svc, "center_b", Rational(4));
    Rational da = a - ca;
    Rational db = b - cb;
    units_ = da * da + db * db;
  }

  bool terminal() const override { return true; }

  Rational service_units(const Message&) const override { return units_; }

 private:
  Rational units_;
};

Registry make_builtin_registry() {
  Registry reg;
  reg.add("source", [](const ServiceDef& svc) -> std::unique_ptr<Behavior> {
    return std::make_unique<SourceBehavior>(svc);
  });
  reg.add("transform", [](const ServiceDef& svc) -> std::unique_ptr<Behavior> {
    return std::make_unique<TransformBehavior>(svc);
  });
  reg.add("sink", [](const ServiceDef& svc) -> std::unique_ptr<Behavior> {
    return std::make_unique<SinkBehavior>(svc);
  });
  reg.add("quadratic_sink", [](const ServiceDef& svc) -> std::unique_ptr<Behavior> {
    return std::make_unique<QuadraticSinkBehavior>(svc);
  });
  return reg;
}

}  // namespace

std::unique_ptr<Behavior> Registry::make(const ServiceDef& svc) const {
  auto it = factories_.find(svc.kind);
  if (it == factories_.end())
    raise(Errc::unknown_behavior, "behavior '" + svc.kind + "' is not registered");
  return it->second(svc);
}

const Registry& registry() {
  static const Registry reg = make_builtin_registry();
  return reg;
}

}  // namespace behaviors

}  // namespace clab
