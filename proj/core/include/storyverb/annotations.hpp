#pragma once

#include <array>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace storyverb {

inline constexpr std::size_t kQuestionCount = 15;
inline constexpr std::string_view kUnclearStrategy = "Unclear";

// One annotator's yes/no answers for one video, in canonical question order.
struct AnnotationSheet {
    std::string annotator_id;
    std::string video_id;
    std::array<bool, kQuestionCount> answers{};
};

struct StrategyLabelSet {
    std::string video_id;
    std::set<std::string> strategies;
    double agreement = 0.0;
    int n_annotators = 0;

    bool operator==(const StrategyLabelSet&) const = default;
};

struct PersuasionQuestion {
    std::string id;     // q1..q15
    std::string text;
    std::vector<std::string> strategies;
};

// The fifteen annotation questions and the strategies each one evidences.
class QuestionStrategyMap {
public:
    // Throws ParseError unless there are exactly 15 questions, each mapping
    // into the 12-strategy vocabulary.
    QuestionStrategyMap(std::vector<PersuasionQuestion> questions,
                        std::vector<std::string> vocabulary);
    static QuestionStrategyMap load(const std::filesystem::path& path);

    const std::vector<PersuasionQuestion>& questions() const { return questions_; }
    const std::vector<std::string>& vocabulary() const { return vocabulary_; }

private:
    std::vector<PersuasionQuestion> questions_;
    std::vector<std::string> vocabulary_;
};

enum class AffirmationRule { majority, any, unanimous };

AffirmationRule affirmation_rule_from_string(std::string_view name);

struct AggregationResult {
    std::vector<StrategyLabelSet> retained;   // sorted by video_id
    std::vector<std::string> dropped;         // sorted
};

// Mean over questions of the fraction of annotator pairs answering alike.
double sheet_agreement(std::span<const AnnotationSheet* const> sheets);

// Per video: affirmed questions -> union of their strategies ({Unclear} when
// none), agreement as above, videos under `min_agreement` dropped.
// Throws DatasetError for a video with fewer than two sheets or an annotator
// answering one video twice.
AggregationResult aggregate_annotations(std::span<const AnnotationSheet> sheets,
                                        const QuestionStrategyMap& qmap,
                                        double min_agreement = 0.6,
                                        AffirmationRule rule = AffirmationRule::majority);

// Delimited rows: annotator_id,video_id,q1..q15 with yes/no values. A header
// row is optional. Throws ParseError naming the line.
std::vector<AnnotationSheet> parse_annotation_csv(std::string_view text,
                                                  const std::string& source = "<csv>");

void to_json(nlohmann::json& j, const StrategyLabelSet& s);
void from_json(const nlohmann::json& j, StrategyLabelSet& s);

}  // namespace storyverb
