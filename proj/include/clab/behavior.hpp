#ifndef CLAB_BEHAVIOR_HPP
#define CLAB_BEHAVIOR_HPP

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "clab/rational.hpp"
#include "clab/spec.hpp"

namespace clab {

class Emulator;
struct InstanceRuntime;
struct Message;

/// A service behavior bound to one instance. Hooks run inside the
/// single-threaded event loop of the owning deployment.
class Behavior {
 public:
  virtual ~Behavior() = default;

  /// Service-units charged for processing msg on this instance.
  virtual Rational service_units(const Message& msg) const;

  /// Producers schedule their first emission here (workflow launch phase).
  virtual void on_launch(Emulator& em, InstanceRuntime& self);

  /// Fired for each scheduled injection tick of this instance.
  virtual void on_injection_tick(Emulator& em, InstanceRuntime& self);

  /// Processing of msg just completed; emit any output messages.
  virtual void on_processed(Emulator& em, InstanceRuntime& self, const Message& msg);

  /// Terminal behaviors complete records (sinks).
  virtual bool terminal() const { return false; }
  /// Producers react to the launch phase.
  virtual bool producer() const { return false; }

 protected:
  Rational base_units_ = Rational(0);
  Rational per_bit_units_ = Rational(0);
};

namespace behaviors {

using Factory =
    std::function<std::unique_ptr<Behavior>(const ServiceDef&)>;

/// Immutable after construction; safe to share across threads.
class Registry {
 public:
  bool contains(const std::string& kind) const { return factories_.count(kind) > 0; }

  /// Throws Errc::unknown_behavior for unregistered kinds.
  std::unique_ptr<Behavior> make(const ServiceDef& svc) const;

  void add(const std::string& kind, Factory factory) { factories_[kind] = std::move(factory); }

 private:
  std::map<std::string, Factory> factories_;
};

/// Built-in registry: source, transform, sink, quadratic_sink.
const Registry& registry();

}  // namespace behaviors

}  // namespace clab

#endif  // CLAB_BEHAVIOR_HPP
