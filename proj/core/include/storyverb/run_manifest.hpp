#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "storyverb/config.hpp"

namespace storyverb {

enum class StageState { pending, cached, done, failed };

struct StageStatus {
    StageState state = StageState::pending;
    std::string reason;   // failed only
};

// Record of one CLI stage run over a corpus.
class RunManifest {
public:
    RunManifest(std::string verb, PipelineConfig config,
                std::map<std::string, std::string> backend_ids, std::string created_at);

    const std::string& run_id() const { return run_id_; }

    void add_video(const std::string& video_id);
    // Only pending -> {cached, done, failed} is allowed. Throws std::logic_error
    // otherwise and std::out_of_range for an unknown video.
    void set_status(const std::string& video_id, StageStatus status);
    const StageStatus& status(const std::string& video_id) const;

    std::size_t count(StageState state) const;
    std::size_t size() const { return status_.size(); }

    nlohmann::json to_json() const;

private:
    std::string verb_;
    PipelineConfig config_;
    std::map<std::string, std::string> backend_ids_;
    std::string created_at_;
    std::string run_id_;
    std::map<std::string, StageStatus> status_;
};

std::string to_string(StageState state);

// UTC timestamp in ISO-8601. Honors SOURCE_DATE_EPOCH for reproducible runs.
std::string current_timestamp();

}  // namespace storyverb
