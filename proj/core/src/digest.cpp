#include "anno/digest.hpp"

#include <cstdio>

namespace anno {

std::string to_hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string digest_request(std::string_view body) {
    return to_hex64(fnv1a64(body));
}

void TranscriptDigest::add(std::string_view request_body, std::string_view reply) {
    state_ = fnv1a64(request_body, state_);
    state_ = fnv1a64("\x1f", state_);  // unit separator between request and reply
    state_ = fnv1a64(reply, state_);
    state_ = fnv1a64("\x1e", state_);  // record separator between paths
}

std::string TranscriptDigest::hex() const {
    return to_hex64(state_);
}

}  // namespace anno
