#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace sstem {

// Incremental SHA-256 backed by OpenSSL's EVP interface.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t size);
  void update(std::string_view data) { update(data.data(), data.size()); }
  std::string hex_digest();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::string_view data);

// 64-bit FNV-1a; used for token bucketing where a cryptographic digest is
// unnecessary.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace sstem
