#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace storyverb {

struct VideoAsset {
    std::string video_id;
    std::string uri;
    double duration_s = 0.0;
    double fps = 1.0;
    std::string title;
    std::optional<std::string> channel;
    bool is_advertisement = false;

    bool operator==(const VideoAsset&) const = default;
};

// Throws DatasetError on a broken invariant.
void check_video(const VideoAsset& video);

void to_json(nlohmann::json& j, const VideoAsset& v);
void from_json(const nlohmann::json& j, VideoAsset& v);

}  // namespace storyverb
