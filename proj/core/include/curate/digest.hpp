#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace curate {

std::string sha256_hex(std::string_view data);

// First eight bytes of SHA-256, little-endian.
std::uint64_t hash64(std::string_view data);

// Derives an independent stream seed from a base seed and a label.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view label);

// Order-independent digest over (id, payload) pairs: pairs are sorted by id, each
// payload is hashed, and the ordered list of "id:payload-hash" lines is hashed.
std::string content_digest(std::vector<std::pair<std::string, std::string>> id_payloads);

}  // namespace curate
