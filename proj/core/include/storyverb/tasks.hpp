#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "storyverb/config.hpp"
#include "storyverb/emotion.hpp"
#include "storyverb/llm_gateway.hpp"
#include "storyverb/prompt.hpp"
#include "storyverb/task_types.hpp"

namespace storyverb {

// Task descriptions and label vocabularies shipped in the data directory.
struct TaskCatalog {
    std::map<TaskId, std::string> descriptions;
    std::vector<std::string> topics;        // 38
    std::vector<std::string> strategies;    // 12
    EmotionTaxonomy emotions;               // 30 raw -> 7

    static TaskCatalog load(const std::filesystem::path& data_dir);

    // Spec with the full label set; retrieval tasks get `options` as given.
    TaskSpec spec(TaskId id, std::vector<std::string> options = {}) const;
};

struct StoryContext {
    const PipelineConfig& cfg;
    const PromptTemplates& templates;
    LlmGateway& gateway;
    std::string backend_id;
};

// Throws StageError (with the video id) on gateway failure or empty text.
GeneratedStory generate_story(const VerbalBundle& bundle, const VideoAsset& video,
                              const StoryContext& ctx);

// Options stage 1: whole answer equals an option after trimming punctuation
// and case. Stage 2: exactly one option (after discarding options contained in
// a longer matching option) occurs as a whole-word substring. Otherwise
// unknown. Underscores and hyphens compare as spaces.
std::optional<std::string> parse_label(std::string_view raw, const std::vector<std::string>& options);

// The option acting as "unknown" (case-insensitive "unclear"), if any.
std::optional<std::string> unknown_option(const std::vector<std::string>& options);

// Label is always an option when the set has an unknown option; otherwise an
// unparseable answer leaves label empty.
Prediction classify(const TaskSpec& task, const GeneratedStory& story, const StoryContext& ctx);

enum class StatementKind { action, reason, reason_given_action };

// Free-text statement; reason_given_action requires `context`.
// Throws std::invalid_argument on missing context or empty story.
Prediction generate_statement(StatementKind kind, const GeneratedStory& story,
                              const std::optional<std::string>& context,
                              const TaskCatalog& catalog, const StoryContext& ctx);

}  // namespace storyverb
