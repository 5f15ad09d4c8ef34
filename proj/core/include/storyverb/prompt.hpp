#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "storyverb/config.hpp"
#include "storyverb/signals.hpp"
#include "storyverb/task_types.hpp"
#include "storyverb/video.hpp"

namespace storyverb {

// Plain-text template file split into named sections:
//
//   @@ section_name
//   text with {{placeholders}}
//
// Lines before the first section and lines starting with "##" are comments.
class PromptTemplates {
public:
    static PromptTemplates parse(std::string_view text, const std::string& source = "<templates>");
    static PromptTemplates load(const std::filesystem::path& path);

    bool has(std::string_view section) const;
    const std::string& raw(std::string_view section) const;
    // Throws ParseError for an unknown section or unbound placeholder.
    std::string render(std::string_view section,
                       const std::map<std::string, std::string>& vars) const;

private:
    std::string source_;
    std::map<std::string, std::string, std::less<>> sections_;
};

struct SignalBlock {
    std::string label;
    std::vector<std::string> lines;
};

struct StoryPrompt {
    std::string instruction;
    std::vector<SignalBlock> signal_blocks;
    std::string rendered;
    std::size_t char_count = 0;
};

// Multiset Jaccard over lowercase word tokens: sum of min counts over sum of
// max counts. Two token-free texts compare as 1.
double token_jaccard(std::string_view a, std::string_view b);

// Greedy left-to-right: drop a text whose similarity to any kept text is at
// least `threshold`.
std::vector<std::string> dedup_texts(const std::vector<std::string>& texts, double threshold);

// instruction + "\n" + for each block: "\n" + label + ":\n" + lines + "\n".
std::string render_story_prompt(const std::string& instruction,
                                const std::vector<SignalBlock>& blocks);

// Short videos get metadata, captions, OCR and transcript blocks; long videos
// only captions and transcript. Trailing lines are dropped to fit the budget.
// Throws StageError when there is nothing to verbalize or the instruction
// alone exceeds the budget.
StoryPrompt assemble_story_prompt(const VerbalBundle& bundle, const VideoAsset& video,
                                  const PipelineConfig& cfg, const PromptTemplates& templates);

struct TaskPrompt {
    std::string task_id;
    std::string description;
    std::vector<std::string> options;
    std::string story;
    std::string rendered;
};

// Description, numbered options, story, answer cue. `context` is the given
// action for reason_given_action. Throws std::invalid_argument when an option
// task has no options.
TaskPrompt assemble_task_prompt(const TaskSpec& task, const GeneratedStory& story,
                                const PromptTemplates& templates,
                                const std::optional<std::string>& context = std::nullopt);

}  // namespace storyverb
