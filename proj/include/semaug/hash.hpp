#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace semaug {

/// FNV-1a, 64-bit.
constexpr uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Stable 64-bit key for a record, e.g. fingerprint("caption", 42).
inline uint64_t fingerprint(std::string_view kind, int64_t id) {
    std::string key(kind);
    key += ':';
    key += std::to_string(id);
    return fnv1a64(key);
}

}  // namespace semaug
