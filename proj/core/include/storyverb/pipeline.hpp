#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "storyverb/backends.hpp"
#include "storyverb/config.hpp"
#include "storyverb/flow.hpp"
#include "storyverb/signals.hpp"
#include "storyverb/video.hpp"

namespace storyverb {

// Vision and knowledge backends for the verbalize stage.
struct BackendSet {
    std::unique_ptr<CaptionBackend> captioner;
    std::unique_ptr<OcrBackend> ocr;
    std::unique_ptr<KnowledgeBackend> knowledge;
    std::unique_ptr<FlowEstimator> flow;
    std::map<std::string, std::string> ids;   // stage -> backend id

    // Throws ConfigError when a stage names an unregistered backend.
    static BackendSet from_config(const AppConfig& cfg);
};

struct VideoMedia {
    std::optional<std::filesystem::path> frames_dir;
    std::optional<std::filesystem::path> subtitles;
};

// Keyframes -> captions, OCR frames -> words, transcript, brand metadata.
// A video without frames gets an empty caption/OCR section.
VerbalBundle verbalize_video(const VideoAsset& video, const VideoMedia& media,
                             const PipelineConfig& cfg, BackendSet& backends);

// Config slice for the verbalize cache key, including backend ids.
std::string verbalize_slice(const PipelineConfig& cfg,
                            const std::map<std::string, std::string>& backend_ids);

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception is
// rethrown after all workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace storyverb
