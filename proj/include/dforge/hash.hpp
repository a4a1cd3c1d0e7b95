#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace dforge {

// FNV-1a, 64-bit. Used for spec hashes, config hashes and output digests.
// Not cryptographic; collisions are acceptable for replay verification.
class Fnv1a64 {
public:
    Fnv1a64& update(const void* data, std::size_t size);
    Fnv1a64& update(std::string_view s) { return update(s.data(), s.size()); }

    template <typename T>
    Fnv1a64& update_pod(const T& value) {
        return update(&value, sizeof(T));
    }

    std::uint64_t value() const { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ull;
};

std::uint64_t fnv1a64(std::string_view s);

// Digest of a file's bytes, formatted as 16 hex digits. Throws IoError.
std::string file_digest_hex(const std::string& path);

} // namespace dforge
