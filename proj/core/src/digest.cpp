#include "curate/digest.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <array>
#include <cstdio>

namespace curate {

namespace {

std::array<unsigned char, SHA256_DIGEST_LENGTH> sha256(std::string_view data) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> out{};
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), out.data());
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  static constexpr char kHex[] = "0123456789abcdef";
  const auto raw = sha256(data);
  std::string hex;
  hex.reserve(raw.size() * 2);
  for (unsigned char b : raw) {
    hex.push_back(kHex[b >> 4]);
    hex.push_back(kHex[b & 0xF]);
  }
  return hex;
}

std::uint64_t hash64(std::string_view data) {
  const auto raw = sha256(data);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | raw[static_cast<std::size_t>(i)];
  return v;
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view label) {
  std::string buf = std::to_string(seed);
  buf.push_back('\x1f');
  buf.append(label);
  return hash64(buf);
}

std::string content_digest(std::vector<std::pair<std::string, std::string>> id_payloads) {
  std::sort(id_payloads.begin(), id_payloads.end());
  std::string lines;
  for (const auto& [id, payload] : id_payloads) {
    lines += id;
    lines.push_back(':');
    lines += sha256_hex(payload);
    lines.push_back('\n');
  }
  return sha256_hex(lines);
}

}  // namespace curate
