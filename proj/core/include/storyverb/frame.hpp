#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace storyverb {

// One decoded video frame. Luma is stored as 8-bit samples; luma_at() gives
// the normalized [0,1] value. Color is optional interleaved RGB.
struct Frame {
    std::int64_t index = 0;
    double timestamp_s = 0.0;
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> luma;
    std::vector<std::uint8_t> rgb;

    bool has_color() const { return !rgb.empty(); }
    double luma_at(int x, int y) const {
        return luma[static_cast<std::size_t>(y) * width + x] / 255.0;
    }
    double mean_luma() const;
};

Frame make_gray_frame(int width, int height, std::vector<std::uint8_t> luma);

// Netpbm (P2/P3/P5/P6, maxval <= 255). Throws ParseError on malformed data.
Frame decode_netpbm(const std::vector<std::uint8_t>& bytes, const std::string& source = "<memory>");
Frame read_netpbm(const std::filesystem::path& path);
// P6 when the frame has color, P5 otherwise.
std::vector<std::uint8_t> encode_netpbm(const Frame& frame);
void write_netpbm(const std::filesystem::path& path, const Frame& frame);

}  // namespace storyverb
