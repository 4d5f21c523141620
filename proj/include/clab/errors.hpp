#ifndef CLAB_ERRORS_HPP
#define CLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace clab {

enum class Errc {
  syntax,
  schema,
  unknown_behavior,
  unknown_preset,
  capacity_exceeded,
  missing_layer_hosts,
  phase,
  corrupt_archive,
  no_samples,
  continuous_dimension,
  exhausted_space,
  non_numeric_parameter,
  overflow,
  io,
  invalid_argument,
};

const char* errc_name(Errc code) noexcept;

/// Single exception type for the whole library; `code()` drives CLI exit
/// status mapping.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace clab

#endif  // CLAB_ERRORS_HPP
