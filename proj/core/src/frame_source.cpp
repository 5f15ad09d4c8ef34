#include "storyverb/frame_source.hpp"

#include <algorithm>
#include <cctype>

#include "storyverb/errors.hpp"

namespace storyverb {

namespace {

// Last run of digits in the stem, or -1.
long long frame_number(const std::filesystem::path& p) {
    const std::string stem = p.stem().string();
    long long value = -1;
    std::size_t i = 0;
    while (i < stem.size()) {
        if (std::isdigit(static_cast<unsigned char>(stem[i]))) {
            long long v = 0;
            while (i < stem.size() && std::isdigit(static_cast<unsigned char>(stem[i]))) {
                v = v * 10 + (stem[i] - '0');
                ++i;
            }
            value = v;
        } else {
            ++i;
        }
    }
    return value;
}

void stamp(Frame& f, std::size_t index, double fps) {
    f.index = static_cast<std::int64_t>(index);
    f.timestamp_s = static_cast<double>(index) / fps;
}

}  // namespace

DirectoryFrameSource::DirectoryFrameSource(const std::filesystem::path& dir, double fps) : fps_(fps) {
    if (!(fps > 0)) throw std::invalid_argument("fps must be positive");
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw StageError("frame directory not found: " + dir.string());
    std::vector<std::pair<long long, std::filesystem::path>> numbered;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension().string();
        if (ext != ".pgm" && ext != ".ppm" && ext != ".pnm") continue;
        const long long n = frame_number(entry.path());
        if (n < 0) continue;
        numbered.emplace_back(n, entry.path());
    }
    std::sort(numbered.begin(), numbered.end());
    for (auto& [n, p] : numbered) files_.push_back(std::move(p));
}

std::optional<Frame> DirectoryFrameSource::next() {
    if (pos_ >= files_.size()) return std::nullopt;
    Frame f = read_netpbm(files_[pos_]);
    stamp(f, pos_, fps_);
    ++pos_;
    return f;
}

VectorFrameSource::VectorFrameSource(std::vector<Frame> frames, double fps)
    : frames_(std::move(frames)), fps_(fps) {
    if (!(fps > 0)) throw std::invalid_argument("fps must be positive");
}

std::optional<Frame> VectorFrameSource::next() {
    if (pos_ >= frames_.size()) return std::nullopt;
    Frame f = frames_[pos_];
    stamp(f, pos_, fps_);
    ++pos_;
    return f;
}

}  // namespace storyverb
