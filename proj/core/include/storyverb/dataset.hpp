#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "storyverb/annotations.hpp"
#include "storyverb/tasks.hpp"
#include "storyverb/video.hpp"

namespace storyverb {

enum class DatasetName { video_story, video_ads, persuasion };

std::string_view to_string(DatasetName name);
// Throws std::invalid_argument.
DatasetName dataset_from_string(std::string_view name);

inline constexpr std::size_t kStatementsPerVideo = 5;

struct AdsLabels {
    std::string topic;
    std::vector<std::string> emotions;   // raw annotator labels
    std::vector<std::string> actions;    // exactly 5
    std::vector<std::string> reasons;    // exactly 5

    // Most frequent raw emotion, first listed on ties.
    std::string majority_emotion() const;
};

// Layout under root:
//   manifest.jsonl                  one VideoAsset per line
//   videos/<id>/labels.json         gold labels (required)
//   videos/<id>/frames/             numbered .pgm/.ppm (optional)
//   videos/<id>/subtitles.srt|json  transcript (optional)
struct DatasetManifest {
    DatasetName name = DatasetName::video_story;
    std::filesystem::path root;
    std::vector<VideoAsset> items;
    std::map<std::string, std::string> stories;
    std::map<std::string, AdsLabels> ads;
    std::map<std::string, StrategyLabelSet> persuasion;

    std::filesystem::path sidecar(const std::string& video_id) const;
    std::optional<std::filesystem::path> frames_dir(const std::string& video_id) const;
    std::optional<std::filesystem::path> subtitles(const std::string& video_id) const;
    const VideoAsset& video(const std::string& video_id) const;
};

// Missing media is tolerated; missing or malformed labels are not. Throws
// DatasetError naming the video and offending label.
DatasetManifest load_dataset(DatasetName name, const std::filesystem::path& root,
                             const TaskCatalog& catalog);

struct CorpusStats {
    std::size_t items = 0;
    std::size_t with_media = 0;
    double mean_duration_s = 0.0;
    double mean_story_words = 0.0;   // video_story only
    std::map<std::string, std::size_t> label_histogram;
};

CorpusStats corpus_stats(const DatasetManifest& manifest);
nlohmann::json to_json(const CorpusStats& stats);

}  // namespace storyverb
