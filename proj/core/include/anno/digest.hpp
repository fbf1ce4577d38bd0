#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace anno {

// FNV-1a, 64-bit. Stable across platforms and runs; used for request and
// transcript digests (resume/dedup keys, determinism checks).
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t state = 0xcbf29ce484222325ull) {
    for (unsigned char c : data) {
        state ^= c;
        state *= 0x100000001b3ull;
    }
    return state;
}

std::string to_hex64(std::uint64_t value);

// Digest of a single serialized request body.
std::string digest_request(std::string_view body);

// Running digest over (request body, raw reply) pairs in path order.
class TranscriptDigest {
public:
    void add(std::string_view request_body, std::string_view reply);
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ull;
};

}  // namespace anno
