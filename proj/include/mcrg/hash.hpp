#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mcrg {

// Platform-stable 64-bit string hash: FNV-1a followed by the splitmix64
// finalizer so that short, similar keys still spread over the full range.
// Values are persisted (pseudonyms, splits, feature buckets), so this must
// never change.
constexpr std::uint64_t stable_hash64(std::string_view bytes, std::uint64_t seed = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    h += 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    return h ^ (h >> 31);
}

std::string hex64(std::uint64_t value);

}  // namespace mcrg
