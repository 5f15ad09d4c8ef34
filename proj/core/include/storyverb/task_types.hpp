#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "storyverb/llm_gateway.hpp"

namespace storyverb {

enum class TaskId {
    topic,
    emotion,
    emotion_clubbed,
    persuasion,
    action_retrieval,
    reason_retrieval,
    action_gen,
    reason_gen,
    reason_given_action,
};

enum class TaskKind { classification, retrieval, generation };

std::string_view to_string(TaskId id);
// Throws std::invalid_argument for an unknown name.
TaskId task_from_string(std::string_view name);
TaskKind kind_of(TaskId id);
inline bool has_options(TaskId id) { return kind_of(id) != TaskKind::generation; }

struct TaskSpec {
    TaskId id = TaskId::topic;
    std::string description;
    std::vector<std::string> options;   // empty for generation tasks
};

struct GeneratedStory {
    std::string video_id;
    std::string text;
    std::size_t word_count = 0;
    GenerationRequest request;   // prompt omitted when persisted
    std::string prompt_digest;
};

struct Prediction {
    std::string video_id;
    TaskId task_id = TaskId::topic;
    std::optional<std::string> label;   // option tasks; absent = unknown
    std::optional<std::string> text;    // generation tasks
    std::string raw_response;
    std::string backend_id;
    std::string prompt_digest;
};

std::size_t count_words(std::string_view text);

void to_json(nlohmann::json& j, const GeneratedStory& s);
void from_json(const nlohmann::json& j, GeneratedStory& s);
void to_json(nlohmann::json& j, const Prediction& p);
void from_json(const nlohmann::json& j, Prediction& p);

}  // namespace storyverb
