#include "storyverb/keyframes.hpp"

#include <algorithm>
#include <cmath>

#include "storyverb/errors.hpp"

namespace storyverb {

const char* to_string(SamplingMethod m) {
    return m == SamplingMethod::flow ? "flow" : "uniform";
}

bool is_blank(const Frame& frame, const PipelineConfig& cfg) {
    const double m = frame.mean_luma();
    return !(m > cfg.blank_low_luma && m < cfg.blank_high_luma);
}

std::vector<Frame> filter_blank(std::vector<Frame> frames, const PipelineConfig& cfg) {
    std::erase_if(frames, [&cfg](const Frame& f) { return is_blank(f, cfg); });
    return frames;
}

std::vector<std::size_t> uniform_positions(std::size_t n, std::size_t count) {
    std::vector<std::size_t> out;
    if (n == 0 || count == 0) return out;
    if (count >= n) {
        for (std::size_t i = 0; i < n; ++i) out.push_back(i);
        return out;
    }
    for (std::size_t i = 0; i < count; ++i) out.push_back(i * n / count);
    return out;
}

namespace {

std::optional<Frame> pull(FrameSource& source) {
    try {
        return source.next();
    } catch (const ParseError& e) {
        throw StageError(std::string("undecodable frame stream: ") + e.what());
    }
}

std::int64_t uniform_stride(double fps) {
    return std::max<std::int64_t>(1, std::llround(fps));
}

KeyframeSet finish_uniform(std::vector<Frame> samples, const PipelineConfig& cfg) {
    KeyframeSet out;
    out.method = SamplingMethod::uniform;
    const auto picks = uniform_positions(samples.size(), static_cast<std::size_t>(cfg.max_keyframes));
    for (auto p : picks) out.frames.push_back(std::move(samples[p]));
    return out;
}

struct Candidate {
    Frame frame;
    double score;
};

// Higher score first, lower index on ties.
bool ranks_before(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.frame.index < b.frame.index;
}

}  // namespace

KeyframeSet select_keyframes(const VideoAsset& video, FrameSource& frames, const PipelineConfig& cfg,
                             const FlowEstimator& estimator) {
    const std::int64_t stride = uniform_stride(frames.fps());
    const bool short_video = video.duration_s < cfg.short_video_max_s;
    const auto cap = static_cast<std::size_t>(cfg.max_keyframes);

    std::vector<Frame> uniform;            // non-blank 1 fps samples
    std::vector<Candidate> candidates;     // best `cap` above threshold
    std::optional<Frame> prev;
    std::size_t seen = 0;

    while (auto cur = pull(frames)) {
        ++seen;
        const bool blank = is_blank(*cur, cfg);
        if (short_video && prev) {
            const double score = estimate_flow(*prev, *cur, estimator).score;
            if (!blank && score > cfg.flow_threshold) {
                Candidate c{*cur, score};
                if (candidates.size() < cap) {
                    candidates.push_back(std::move(c));
                } else {
                    auto worst = std::max_element(candidates.begin(), candidates.end(), ranks_before);
                    if (ranks_before(c, *worst)) *worst = std::move(c);
                }
            }
        }
        if (!blank && cur->index % stride == 0) uniform.push_back(*cur);
        prev = std::move(cur);
    }
    if (seen == 0) throw StageError("no frames decoded for video " + video.video_id);

    if (short_video && !candidates.empty()) {
        std::sort(candidates.begin(), candidates.end(),
                  [](const Candidate& a, const Candidate& b) { return a.frame.index < b.frame.index; });
        KeyframeSet out;
        out.method = SamplingMethod::flow;
        for (auto& c : candidates) {
            out.scores.push_back({c.frame.index, c.score});
            out.frames.push_back(std::move(c.frame));
        }
        return out;
    }
    return finish_uniform(std::move(uniform), cfg);
}

KeyframeSet select_keyframes(const VideoAsset& video, FrameSource& frames, const PipelineConfig& cfg) {
    static const BlockMatchingFlow kDefault;
    return select_keyframes(video, frames, cfg, kDefault);
}

std::vector<Frame> sample_ocr_frames(FrameSource& frames, const PipelineConfig& cfg) {
    std::vector<Frame> out;
    const auto stride = static_cast<std::int64_t>(std::max(1, cfg.ocr_frame_stride));
    while (auto f = pull(frames)) {
        if (f->index % stride == 0) out.push_back(std::move(*f));
    }
    return out;
}

}  // namespace storyverb
