#include "storyverb/pipeline.hpp"

#include <atomic>
#include <exception>
#include <thread>

#include "storyverb/errors.hpp"
#include "storyverb/frame_source.hpp"
#include "storyverb/keyframes.hpp"
#include "storyverb/subtitles.hpp"

namespace storyverb {

BackendSet BackendSet::from_config(const AppConfig& cfg) {
    BackendSet set;
    const auto descriptor = [&](std::string_view stage) -> const BackendDescriptor* {
        auto it = cfg.stages.find(std::string(stage));
        if (it == cfg.stages.end()) return nullptr;
        auto b = cfg.backends.find(it->second);
        if (b == cfg.backends.end()) {
            throw ConfigError("stages." + std::string(stage), "unregistered backend '" + it->second + "'");
        }
        set.ids[std::string(stage)] = it->second;
        return &b->second;
    };
    if (const auto* d = descriptor(kStageCaptioner)) set.captioner = make_caption_backend(*d);
    if (const auto* d = descriptor(kStageOcr)) set.ocr = make_ocr_backend(*d);
    if (const auto* d = descriptor(kStageKnowledge)) set.knowledge = make_knowledge_backend(*d);
    if (const auto* d = descriptor(kStageFlow)) {
        set.flow = make_flow_estimator(*d);
    } else {
        BackendDescriptor native;
        native.kind = "native";
        set.flow = make_flow_estimator(native);
        set.ids[std::string(kStageFlow)] = "native";
    }
    return set;
}

VerbalBundle verbalize_video(const VideoAsset& video, const VideoMedia& media, const PipelineConfig& cfg,
                             BackendSet& backends) {
    VerbalBundle b;
    b.video_id = video.video_id;
    b.title = video.title;
    b.keyframe_method = "none";
    if (backends.knowledge) b.metadata = fetch_brand_metadata(video, *backends.knowledge);

    if (media.frames_dir) {
        if (!backends.captioner) throw ConfigError("stages.captioner", "no captioner configured");
        DirectoryFrameSource keyframe_src(*media.frames_dir, video.fps);
        const auto keyframes = select_keyframes(video, keyframe_src, cfg, *backends.flow);
        b.keyframe_method = to_string(keyframes.method);
        auto captions = caption_frames(video.video_id, keyframes, *backends.captioner);
        b.captions = std::move(captions.captions);
        b.caption_failures = std::move(captions.failures);

        if (backends.ocr && video.duration_s < cfg.short_video_max_s) {
            DirectoryFrameSource ocr_src(*media.frames_dir, video.fps);
            const auto frames = filter_blank(sample_ocr_frames(ocr_src, cfg), cfg);
            b.ocr = extract_ocr_words(video.video_id, frames, *backends.ocr);
        }
    }
    b.transcript = load_transcript(video, media.subtitles);
    return b;
}

std::string verbalize_slice(const PipelineConfig& cfg, const std::map<std::string, std::string>& backend_ids) {
    std::string s = config_slice(cfg, "verbalize");
    for (const auto& [stage, id] : backend_ids) s += "backend." + stage + "=" + id + "\n";
    return s;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first;
    std::mutex mu;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            while (!failed) {
                const auto i = next++;
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!first) first = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (first) std::rethrow_exception(first);
}

}  // namespace storyverb
