#include "lobtrend/checksum.hpp"

#include <boost/crc.hpp>
#include <cstdio>
#include <fstream>
#include <vector>

#include "lobtrend/error.hpp"

namespace lobtrend {

using Castagnoli = boost::crc_optimal<32, 0x1EDC6F41, 0xFFFFFFFF, 0xFFFFFFFF, true, true>;

struct Crc32c::Impl {
  Castagnoli crc;
};

Crc32c::Crc32c() : impl_(std::make_unique<Impl>()) {}
Crc32c::~Crc32c() = default;
Crc32c::Crc32c(const Crc32c& other) : impl_(std::make_unique<Impl>(*other.impl_)) {}
Crc32c& Crc32c::operator=(const Crc32c& other) {
  *impl_ = *other.impl_;
  return *this;
}

void Crc32c::update(std::span<const std::byte> bytes) { impl_->crc.process_bytes(bytes.data(), bytes.size()); }
void Crc32c::update(const void* data, std::size_t size) { impl_->crc.process_bytes(data, size); }
std::uint32_t Crc32c::value() const { return impl_->crc.checksum(); }

std::uint32_t crc32c(std::span<const std::byte> bytes) {
  Crc32c c;
  c.update(bytes);
  return c.value();
}

std::uint32_t file_crc32c(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  Crc32c c;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    c.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return c.value();
}

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

}  // namespace lobtrend
