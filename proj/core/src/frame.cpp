#include "storyverb/frame.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include "storyverb/errors.hpp"
#include "storyverb/text.hpp"

namespace storyverb {

double Frame::mean_luma() const {
    if (luma.empty()) return 0.0;
    const double sum = std::accumulate(luma.begin(), luma.end(), 0.0);
    return sum / (255.0 * static_cast<double>(luma.size()));
}

Frame make_gray_frame(int width, int height, std::vector<std::uint8_t> luma) {
    Frame f;
    f.width = width;
    f.height = height;
    f.luma = std::move(luma);
    return f;
}

namespace {

class HeaderReader {
public:
    HeaderReader(const std::vector<std::uint8_t>& bytes, const std::string& source)
        : bytes_(bytes), source_(source) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long read_int() {
        skip_space_and_comments();
        long v = 0;
        std::size_t start = pos_;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1'000'000) throw ParseError(source_, 0, "netpbm value too large");
            ++pos_;
        }
        if (pos_ == start) throw ParseError(source_, 0, "malformed netpbm header");
        return v;
    }

    std::size_t pos() const { return pos_; }
    void advance() { ++pos_; }

private:
    const std::vector<std::uint8_t>& bytes_;
    const std::string& source_;
    std::size_t pos_ = 2;
};

std::uint8_t rec601(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    // Integer weights 77/150/29 sum to 256.
    return static_cast<std::uint8_t>((77 * r + 150 * g + 29 * b + 128) >> 8);
}

}  // namespace

Frame decode_netpbm(const std::vector<std::uint8_t>& bytes, const std::string& source) {
    if (bytes.size() < 2 || bytes[0] != 'P') throw ParseError(source, 0, "not a netpbm image");
    const char kind = static_cast<char>(bytes[1]);
    if (kind != '2' && kind != '3' && kind != '5' && kind != '6')
        throw ParseError(source, 0, std::string("unsupported netpbm type P") + kind);
    const bool color = kind == '3' || kind == '6';
    const bool binary = kind == '5' || kind == '6';

    HeaderReader hdr(bytes, source);
    const long width = hdr.read_int();
    const long height = hdr.read_int();
    const long maxval = hdr.read_int();
    if (width <= 0 || height <= 0) throw ParseError(source, 0, "image dimensions must be positive");
    if (maxval <= 0 || maxval > 255) throw ParseError(source, 0, "only 8-bit netpbm is supported");

    const std::size_t channels = color ? 3 : 1;
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels;
    std::vector<std::uint8_t> samples(count);
    if (binary) {
        hdr.advance();   // exactly one whitespace byte after maxval
        if (bytes.size() - std::min(bytes.size(), hdr.pos()) < count)
            throw ParseError(source, 0, "truncated pixel data");
        std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(hdr.pos()), count, samples.begin());
    } else {
        for (auto& s : samples) {
            const long v = hdr.read_int();
            if (v > maxval) throw ParseError(source, 0, "sample exceeds maxval");
            s = static_cast<std::uint8_t>(v);
        }
    }
    if (maxval != 255) {
        for (auto& s : samples) s = static_cast<std::uint8_t>((s * 255 + maxval / 2) / maxval);
    }

    Frame f;
    f.width = static_cast<int>(width);
    f.height = static_cast<int>(height);
    if (color) {
        f.luma.resize(count / 3);
        for (std::size_t i = 0; i < f.luma.size(); ++i)
            f.luma[i] = rec601(samples[3 * i], samples[3 * i + 1], samples[3 * i + 2]);
        f.rgb = std::move(samples);
    } else {
        f.luma = std::move(samples);
    }
    return f;
}

Frame read_netpbm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, "cannot open image");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_netpbm(bytes, path.string());
}

std::vector<std::uint8_t> encode_netpbm(const Frame& frame) {
    const bool color = frame.has_color();
    std::string header = std::string(color ? "P6" : "P5") + "\n" + std::to_string(frame.width) + " " +
                         std::to_string(frame.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    const auto& px = color ? frame.rgb : frame.luma;
    out.insert(out.end(), px.begin(), px.end());
    return out;
}

void write_netpbm(const std::filesystem::path& path, const Frame& frame) {
    auto bytes = encode_netpbm(frame);
    write_file_atomic(path.string(), std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace storyverb
