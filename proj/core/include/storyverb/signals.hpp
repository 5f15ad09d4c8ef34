#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "storyverb/frame.hpp"
#include "storyverb/keyframes.hpp"
#include "storyverb/video.hpp"

namespace storyverb {

class CaptionBackend;
class OcrBackend;
class KnowledgeBackend;

// Fixed prompts sent to the captioner for every keyframe.
inline constexpr std::string_view kCaptionPrompt = "Caption this image";
inline constexpr std::string_view kObjectsPrompt =
    "Can you tell the objects that are present in the image?";

struct FrameCaption {
    std::int64_t frame_index = 0;
    double timestamp_s = 0.0;
    std::string caption;
    std::vector<std::string> objects;   // lowercase, deduplicated

    bool operator==(const FrameCaption&) const = default;
};

struct FrameFailure {
    std::int64_t frame_index = 0;
    std::string reason;

    bool operator==(const FrameFailure&) const = default;
};

struct CaptionResult {
    std::vector<FrameCaption> captions;
    std::vector<FrameFailure> failures;
};

// Unique OCR words in first-occurrence order.
class OcrWords {
public:
    OcrWords() = default;
    // Normalizes, drops empties and duplicates.
    void add(std::string_view raw_token);
    const std::vector<std::string>& words() const { return words_; }
    bool empty() const { return words_.empty(); }
    std::size_t size() const { return words_.size(); }

    bool operator==(const OcrWords& o) const { return words_ == o.words_; }

private:
    std::vector<std::string> words_;
    std::unordered_set<std::string> seen_;
};

// Case-fold and strip sentence punctuation from both ends. Interior symbols
// and the symbols % $ # & + @ at the edges are kept. May return "".
std::string normalize_ocr_token(std::string_view token);

struct TranscriptSegment {
    double start_s = 0.0;
    double dur_s = 0.0;
    std::string text;

    bool operator==(const TranscriptSegment&) const = default;
};

struct Transcript {
    std::vector<TranscriptSegment> segments;   // sorted by start_s

    bool operator==(const Transcript&) const = default;
};

enum class MetadataSource { knowledge_base, none };

struct BrandMetadata {
    std::optional<std::string> company;
    std::optional<std::string> product_line;
    std::optional<std::string> description;
    MetadataSource source = MetadataSource::none;

    bool operator==(const BrandMetadata&) const = default;
    bool resolved() const { return source == MetadataSource::knowledge_base; }
};

struct VerbalBundle {
    std::string video_id;
    std::string title;
    BrandMetadata metadata;
    std::string keyframe_method;            // "flow" or "uniform"
    std::vector<FrameCaption> captions;
    std::vector<FrameFailure> caption_failures;
    OcrWords ocr;
    std::optional<Transcript> transcript;

    bool operator==(const VerbalBundle&) const = default;
};

// One FrameCaption per keyframe, in keyframe order. A frame whose backend call
// fails is recorded in `failures` and skipped. Throws StageError when every
// frame fails.
CaptionResult caption_frames(const std::string& video_id, const KeyframeSet& keyframes,
                             CaptionBackend& backend);

// Splits an object-list answer ("a car, a road and trees") into lowercase,
// deduplicated object names.
std::vector<std::string> parse_object_list(std::string_view answer);

// Failed frames are skipped; if all fail the result is empty.
OcrWords extract_ocr_words(const std::string& video_id, const std::vector<Frame>& frames,
                           OcrBackend& backend);

// Non-ads skip the lookup entirely. Backend failure degrades to source=none.
BrandMetadata fetch_brand_metadata(const VideoAsset& video, KnowledgeBackend& backend);

void to_json(nlohmann::json& j, const FrameCaption& c);
void from_json(const nlohmann::json& j, FrameCaption& c);
void to_json(nlohmann::json& j, const Transcript& t);
void from_json(const nlohmann::json& j, Transcript& t);
void to_json(nlohmann::json& j, const BrandMetadata& m);
void from_json(const nlohmann::json& j, BrandMetadata& m);
void to_json(nlohmann::json& j, const VerbalBundle& b);
void from_json(const nlohmann::json& j, VerbalBundle& b);

}  // namespace storyverb
