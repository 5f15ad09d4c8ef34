#include "storyverb/video.hpp"

#include <cmath>

#include "storyverb/errors.hpp"

namespace storyverb {

void check_video(const VideoAsset& v) {
    if (v.video_id.empty()) throw DatasetError("video_id must not be empty");
    if (!std::isfinite(v.duration_s) || v.duration_s < 0)
        throw DatasetError(v.video_id + ": duration_s must be >= 0");
    if (!std::isfinite(v.fps) || v.fps <= 0) throw DatasetError(v.video_id + ": fps must be > 0");
}

void to_json(nlohmann::json& j, const VideoAsset& v) {
    j = nlohmann::json{{"video_id", v.video_id},   {"uri", v.uri},
                       {"duration_s", v.duration_s}, {"fps", v.fps},
                       {"title", v.title},         {"is_advertisement", v.is_advertisement}};
    if (v.channel) j["channel"] = *v.channel;
}

void from_json(const nlohmann::json& j, VideoAsset& v) {
    v.video_id = j.at("video_id").get<std::string>();
    v.uri = j.value("uri", std::string{});
    v.duration_s = j.at("duration_s").get<double>();
    v.fps = j.at("fps").get<double>();
    v.title = j.value("title", std::string{});
    if (auto it = j.find("channel"); it != j.end() && !it->is_null()) v.channel = it->get<std::string>();
    else v.channel.reset();
    v.is_advertisement = j.value("is_advertisement", false);
}

}  // namespace storyverb
