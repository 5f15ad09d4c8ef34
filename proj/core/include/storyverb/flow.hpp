#pragma once

#include <cstdint>

#include "storyverb/frame.hpp"

namespace storyverb {

// Motion magnitude between frame_index-1 and frame_index.
struct FlowScore {
    std::int64_t frame_index = 0;
    double score = 0.0;

    bool operator==(const FlowScore&) const = default;
};

class FlowEstimator {
public:
    virtual ~FlowEstimator() = default;
    // prev and next must have equal dimensions.
    virtual double estimate(const Frame& prev, const Frame& next) const = 0;
};

// Exhaustive block matching on the luma plane.
//
// The previous frame is tiled into non-overlapping block x block squares. For
// each tile every displacement within +-radius (that keeps the tile inside the
// next frame) is tried and the one with the lowest sum of absolute differences
// wins; ties go to the smaller displacement. A tile whose best match still
// differs by more than match_tolerance per pixel has no counterpart in the next
// frame (a cut, or motion beyond the search window) and counts as radius*sqrt(2).
// The score is scale times the mean displacement magnitude over tiles.
struct BlockMatchingParams {
    int block = 16;
    int radius = 8;
    double scale = 10.0;
    double match_tolerance = 0.1;
};

class BlockMatchingFlow : public FlowEstimator {
public:
    explicit BlockMatchingFlow(BlockMatchingParams params = {}) : params_(params) {}
    double estimate(const Frame& prev, const Frame& next) const override;
    const BlockMatchingParams& params() const { return params_; }

private:
    BlockMatchingParams params_;
};

// Throws std::invalid_argument on a dimension mismatch.
FlowScore estimate_flow(const Frame& prev, const Frame& next, const FlowEstimator& estimator);
FlowScore estimate_flow(const Frame& prev, const Frame& next);

}  // namespace storyverb
