#ifndef HYPERFE_HASH_HPP
#define HYPERFE_HASH_HPP

#include <cstdint>
#include <cstring>
#include <string>

namespace hyperfe {

// FNV-1a 64-bit accumulator used for provenance tags (mesh/config/basis
// hashes). Not cryptographic; detects stale or mismatched pipeline inputs.
class Fnv1a {
 public:
  Fnv1a& add_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  template <typename T>
  Fnv1a& add(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    return add_bytes(&v, sizeof(T));
  }

  Fnv1a& add(const std::string& s) { return add_bytes(s.data(), s.size()); }

  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hash_to_hex(std::uint64_t h);
std::uint64_t hex_to_hash(const std::string& s);

}  // namespace hyperfe

#endif
