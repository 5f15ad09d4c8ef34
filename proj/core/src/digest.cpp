#include "storyverb/digest.hpp"

#include <array>
#include <stdexcept>

#include <openssl/evp.h>

namespace storyverb {

namespace {

std::array<unsigned char, 32> sha256_raw(const void* data, std::size_t size) {
    std::array<unsigned char, 32> out{};
    unsigned int len = 0;
    if (EVP_Digest(data, size, out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size()) {
        throw std::runtime_error("sha256 failed");
    }
    return out;
}

std::string to_hex(const std::array<unsigned char, 32>& raw) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex(raw.size() * 2, '0');
    for (std::size_t i = 0; i < raw.size(); ++i) {
        hex[2 * i] = kHex[raw[i] >> 4];
        hex[2 * i + 1] = kHex[raw[i] & 0xF];
    }
    return hex;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    return to_hex(sha256_raw(bytes.data(), bytes.size()));
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    return to_hex(sha256_raw(bytes.data(), bytes.size()));
}

std::uint64_t digest_u64(std::string_view bytes) {
    auto raw = sha256_raw(bytes.data(), bytes.size());
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | raw[i];
    return v;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                            static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

}  // namespace storyverb
