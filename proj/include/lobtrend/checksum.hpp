#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>

namespace lobtrend {

/// Incremental CRC32C (Castagnoli).
class Crc32c {
 public:
  Crc32c();
  ~Crc32c();
  Crc32c(const Crc32c&);
  Crc32c& operator=(const Crc32c&);

  void update(std::span<const std::byte> bytes);
  void update(const void* data, std::size_t size);
  std::uint32_t value() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::uint32_t crc32c(std::span<const std::byte> bytes);
std::uint32_t file_crc32c(const std::filesystem::path& path);
std::string hex32(std::uint32_t v);

}  // namespace lobtrend
