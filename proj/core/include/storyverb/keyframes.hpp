#pragma once

#include <vector>

#include "storyverb/config.hpp"
#include "storyverb/flow.hpp"
#include "storyverb/frame_source.hpp"
#include "storyverb/video.hpp"

namespace storyverb {

enum class SamplingMethod { flow, uniform };

struct KeyframeSet {
    SamplingMethod method = SamplingMethod::uniform;
    std::vector<Frame> frames;        // strictly increasing index
    std::vector<FlowScore> scores;    // aligned with frames; flow method only
};

const char* to_string(SamplingMethod m);

bool is_blank(const Frame& frame, const PipelineConfig& cfg);

// Keeps frames whose mean luma lies strictly inside (blank_low, blank_high).
std::vector<Frame> filter_blank(std::vector<Frame> frames, const PipelineConfig& cfg);

// Short videos: flow-ranked keyframes (falls back to uniform when nothing
// clears the threshold). Long videos: one frame per second of video.
// Throws StageError when the stream yields no frames.
KeyframeSet select_keyframes(const VideoAsset& video, FrameSource& frames,
                             const PipelineConfig& cfg, const FlowEstimator& estimator);
KeyframeSet select_keyframes(const VideoAsset& video, FrameSource& frames,
                             const PipelineConfig& cfg);

// Frames 0, stride, 2*stride, ...
std::vector<Frame> sample_ocr_frames(FrameSource& frames, const PipelineConfig& cfg);

// Spreads `count` picks evenly over [0, n): floor(i*n/count).
std::vector<std::size_t> uniform_positions(std::size_t n, std::size_t count);

}  // namespace storyverb
