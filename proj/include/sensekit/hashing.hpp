#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sensekit {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a64_bytes(const void* bytes, std::size_t n,
                                   std::uint64_t h = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = kFnvOffset) {
    return fnv1a64_bytes(s.data(), s.size(), h);
}

std::string hex64(std::uint64_t value);

/// FNV-1a over a file's raw bytes. Throws InputError if unreadable.
std::uint64_t hash_file(const std::string& path);

} // namespace sensekit
