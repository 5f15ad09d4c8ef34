#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace storyverb {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_hex(std::span<const std::uint8_t> bytes);

// First 8 bytes of SHA-256, big-endian. Used to derive per-item RNG seeds.
std::uint64_t digest_u64(std::string_view bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);

}  // namespace storyverb
