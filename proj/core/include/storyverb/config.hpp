#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace storyverb {

// Scalar knobs for every pipeline stage. Defaults reproduce the published setup.
struct PipelineConfig {
    double flow_threshold = 50.0;       // backend-defined flow score units
    double short_video_max_s = 120.0;   // videos shorter than this use flow keyframes
    int ocr_frame_stride = 10;
    double story_temperature = 0.75;
    double task_temperature = 0.3;
    int max_keyframes = 20;
    double blank_low_luma = 0.02;
    double blank_high_luma = 0.98;
    double dedup_jaccard = 0.8;
    int prompt_char_budget = 12000;
    int max_output_chars = 4000;
    std::int64_t rng_seed = 0;

    bool operator==(const PipelineConfig&) const = default;
};

// Throws ConfigError listing every violated invariant.
PipelineConfig validate_config(const PipelineConfig& cfg);

// Stable `key=value` lines of only the fields that influence `stage`.
// Known stages: keyframes, ocr_frames, verbalize, prompt, story, tasks.
std::string config_slice(const PipelineConfig& cfg, std::string_view stage);

// Shortest round-trip decimal form, identical on every platform.
std::string format_real(double v);

// Where a backend lives and how to talk to it.
struct BackendDescriptor {
    std::string id;
    std::string kind = "mock";        // mock | http | overlap
    std::string endpoint;             // http: base URL plus path
    std::filesystem::path fixture;    // mock: lookup table file
    std::string auth_env;             // empty: STORYVERB_<ID>_KEY
    double rate_limit_rpm = 0.0;      // 0 = unlimited
    double timeout_s = 60.0;
    int max_attempts = 5;
    bool cache = true;

    std::string auth_env_name() const;
};

// Stage names that take a backend.
inline constexpr std::string_view kStageCaptioner = "captioner";
inline constexpr std::string_view kStageOcr = "ocr";
inline constexpr std::string_view kStageKnowledge = "knowledge_base";
inline constexpr std::string_view kStageStory = "story_llm";
inline constexpr std::string_view kStageTask = "task_llm";
inline constexpr std::string_view kStageFlow = "flow";

// Everything read from the config file.
struct AppConfig {
    PipelineConfig pipeline;
    std::map<std::string, BackendDescriptor> backends;   // by id
    std::map<std::string, std::string> stages;           // stage -> backend id
    std::map<std::string, std::filesystem::path> datasets;
    std::optional<std::filesystem::path> data_dir;
    std::optional<std::filesystem::path> cache_dir;
};

// A `--dotted.name=value` override from the command line.
struct ConfigOverride {
    std::string key;
    std::string value;
};

// Parses the YAML config file (or defaults when `path` is empty), applies
// overrides in order, and validates. Relative paths resolve against the
// config file's directory.
AppConfig load_app_config(const std::optional<std::filesystem::path>& path,
                          const std::vector<ConfigOverride>& overrides = {});

// True when `key` names an overridable config field.
bool is_config_key(std::string_view key);

// Directory holding templates and vocabularies.
std::filesystem::path resolve_data_dir(const AppConfig& cfg);

}  // namespace storyverb
