#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "storyverb/frame.hpp"

namespace storyverb {

// A forward-only stream of frames at the video's native rate. next() assigns
// index and timestamp; it returns nullopt at end of stream.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual double fps() const = 0;
    virtual std::optional<Frame> next() = 0;
};

// Numbered .pgm/.ppm files in one directory, ordered by the integer in each
// file name (frame_0001.pgm, 2.ppm, ...).
class DirectoryFrameSource : public FrameSource {
public:
    DirectoryFrameSource(const std::filesystem::path& dir, double fps);

    double fps() const override { return fps_; }
    std::optional<Frame> next() override;
    std::size_t size() const { return files_.size(); }

private:
    std::vector<std::filesystem::path> files_;
    double fps_;
    std::size_t pos_ = 0;
};

// In-memory frames, mostly for synthetic clips.
class VectorFrameSource : public FrameSource {
public:
    VectorFrameSource(std::vector<Frame> frames, double fps);

    double fps() const override { return fps_; }
    std::optional<Frame> next() override;

private:
    std::vector<Frame> frames_;
    double fps_;
    std::size_t pos_ = 0;
};

}  // namespace storyverb
