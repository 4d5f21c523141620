#ifndef CLAB_SHA256_HPP
#define CLAB_SHA256_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace clab {

/// Streaming SHA-256 with value semantics: copying the object snapshots the
/// running state, so a digest-so-far can be taken without disturbing the
/// stream (used for the running event-trace digest).
class Sha256 {
 public:
  Sha256();

  void update(const void* data, std::size_t len);
  void update(std::string_view s) { update(s.data(), s.size()); }

  /// Finalizes a copy; the stream itself stays open.
  std::array<std::uint8_t, 32> digest() const;
  std::string hex() const;

  static std::string hex_of(std::string_view data);
  static std::string hex_of_file(const std::filesystem::path& path);

 private:
  void process_block(const std::uint8_t* block);

  std::array<std::uint32_t, 8> state_;
  std::array<std::uint8_t, 64> buffer_;
  std::uint64_t total_len_ = 0;
  std::size_t buffer_len_ = 0;
};

}  // namespace clab

#endif  // CLAB_SHA256_HPP
