#include "storyverb/run_manifest.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <stdexcept>

#include "storyverb/digest.hpp"

namespace storyverb {

std::string to_string(StageState state) {
    switch (state) {
        case StageState::pending: return "pending";
        case StageState::cached: return "cached";
        case StageState::done: return "done";
        case StageState::failed: return "failed";
    }
    return "?";
}

std::string current_timestamp() {
    std::time_t t = 0;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

RunManifest::RunManifest(std::string verb, PipelineConfig config,
                         std::map<std::string, std::string> backend_ids, std::string created_at)
    : verb_(std::move(verb)),
      config_(config),
      backend_ids_(std::move(backend_ids)),
      created_at_(std::move(created_at)) {
    std::string seed = verb_ + "\n";
    for (const char* stage : {"verbalize", "story", "tasks"}) seed += config_slice(config_, stage);
    for (const auto& [stage, id] : backend_ids_) seed += stage + "=" + id + "\n";
    run_id_ = sha256_hex(seed).substr(0, 16);
}

void RunManifest::add_video(const std::string& video_id) {
    status_.try_emplace(video_id);
}

void RunManifest::set_status(const std::string& video_id, StageStatus status) {
    auto& cur = status_.at(video_id);
    if (cur.state != StageState::pending || status.state == StageState::pending) {
        throw std::logic_error("illegal stage transition for " + video_id + ": " +
                               to_string(cur.state) + " -> " + to_string(status.state));
    }
    cur = std::move(status);
}

const StageStatus& RunManifest::status(const std::string& video_id) const {
    return status_.at(video_id);
}

std::size_t RunManifest::count(StageState state) const {
    std::size_t n = 0;
    for (const auto& [id, s] : status_) n += s.state == state;
    return n;
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json cfg = {
        {"flow_threshold", config_.flow_threshold},
        {"short_video_max_s", config_.short_video_max_s},
        {"ocr_frame_stride", config_.ocr_frame_stride},
        {"story_temperature", config_.story_temperature},
        {"task_temperature", config_.task_temperature},
        {"max_keyframes", config_.max_keyframes},
        {"blank_low_luma", config_.blank_low_luma},
        {"blank_high_luma", config_.blank_high_luma},
        {"dedup_jaccard", config_.dedup_jaccard},
        {"prompt_char_budget", config_.prompt_char_budget},
        {"max_output_chars", config_.max_output_chars},
        {"rng_seed", config_.rng_seed},
    };
    nlohmann::json videos = nlohmann::json::object();
    for (const auto& [id, s] : status_) {
        nlohmann::json entry = {{"status", to_string(s.state)}};
        if (s.state == StageState::failed) entry["reason"] = s.reason;
        videos[id] = std::move(entry);
    }
    return {{"run_id", run_id_},   {"verb", verb_},         {"config", cfg},
            {"backend_ids", backend_ids_}, {"created_at", created_at_}, {"videos", videos}};
}

}  // namespace storyverb
