#include "storyverb/annotations.hpp"

#include <algorithm>
#include <map>

#include "storyverb/errors.hpp"
#include "storyverb/text.hpp"

namespace storyverb {

QuestionStrategyMap::QuestionStrategyMap(std::vector<PersuasionQuestion> questions,
                                         std::vector<std::string> vocabulary)
    : questions_(std::move(questions)), vocabulary_(std::move(vocabulary)) {
    const std::string src = "persuasion questions";
    if (questions_.size() != kQuestionCount) {
        throw ParseError(src, 0, "expected " + std::to_string(kQuestionCount) + " questions, got " +
                                     std::to_string(questions_.size()));
    }
    if (vocabulary_.size() != 12) {
        throw ParseError(src, 0, "expected 12 strategies, got " + std::to_string(vocabulary_.size()));
    }
    if (std::find(vocabulary_.begin(), vocabulary_.end(), kUnclearStrategy) == vocabulary_.end()) {
        throw ParseError(src, 0, "strategy vocabulary lacks " + std::string(kUnclearStrategy));
    }
    for (const auto& q : questions_) {
        if (q.strategies.empty()) throw ParseError(src, 0, q.id + " maps to no strategy");
        for (const auto& s : q.strategies) {
            if (std::find(vocabulary_.begin(), vocabulary_.end(), s) == vocabulary_.end()) {
                throw ParseError(src, 0, q.id + " maps to unknown strategy '" + s + "'");
            }
        }
    }
}

QuestionStrategyMap QuestionStrategyMap::load(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path.string()));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string(), 0, e.what());
    } catch (const std::runtime_error& e) {
        throw ConfigError("data_dir", e.what());
    }
    try {
        std::vector<PersuasionQuestion> qs;
        for (const auto& q : j.at("questions")) {
            qs.push_back({q.at("id").get<std::string>(), q.at("text").get<std::string>(),
                          q.at("strategies").get<std::vector<std::string>>()});
        }
        return QuestionStrategyMap(std::move(qs), j.at("strategies").get<std::vector<std::string>>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), 0, e.what());
    }
}

AffirmationRule affirmation_rule_from_string(std::string_view name) {
    if (name == "majority") return AffirmationRule::majority;
    if (name == "any") return AffirmationRule::any;
    if (name == "unanimous") return AffirmationRule::unanimous;
    throw std::invalid_argument("unknown affirmation rule '" + std::string(name) + "'");
}

double sheet_agreement(std::span<const AnnotationSheet* const> sheets) {
    const std::size_t n = sheets.size();
    if (n < 2) throw std::invalid_argument("agreement needs at least two sheets");
    const double pairs = static_cast<double>(n * (n - 1) / 2);
    double sum = 0;
    for (std::size_t q = 0; q < kQuestionCount; ++q) {
        std::size_t yes = 0;
        for (const auto* s : sheets) yes += s->answers[q] ? 1 : 0;
        const std::size_t no = n - yes;
        const auto same = [](std::size_t k) { return k < 2 ? 0 : k * (k - 1) / 2; };
        const double alike = static_cast<double>(same(yes) + same(no));
        sum += alike / pairs;
    }
    return sum / static_cast<double>(kQuestionCount);
}

AggregationResult aggregate_annotations(std::span<const AnnotationSheet> sheets,
                                        const QuestionStrategyMap& qmap, double min_agreement,
                                        AffirmationRule rule) {
    std::map<std::string, std::vector<const AnnotationSheet*>> by_video;
    for (const auto& s : sheets) by_video[s.video_id].push_back(&s);

    AggregationResult out;
    for (const auto& [video, group] : by_video) {
        if (group.size() < 2) {
            throw DatasetError(video + ": needs at least two annotation sheets, has " + std::to_string(group.size()));
        }
        std::set<std::string> annotators;
        for (const auto* s : group) {
            if (!annotators.insert(s->annotator_id).second) {
                throw DatasetError(video + ": annotator " + s->annotator_id + " answered twice");
            }
        }
        const double agreement = sheet_agreement(group);
        if (agreement < min_agreement) {
            out.dropped.push_back(video);
            continue;
        }
        StrategyLabelSet label{video, {}, agreement, static_cast<int>(group.size())};
        for (std::size_t q = 0; q < kQuestionCount; ++q) {
            std::size_t yes = 0;
            for (const auto* s : group) yes += s->answers[q] ? 1 : 0;
            bool affirmed = false;
            switch (rule) {
                case AffirmationRule::majority: affirmed = 2 * yes > group.size(); break;
                case AffirmationRule::any: affirmed = yes > 0; break;
                case AffirmationRule::unanimous: affirmed = yes == group.size(); break;
            }
            if (affirmed) {
                const auto& strategies = qmap.questions()[q].strategies;
                label.strategies.insert(strategies.begin(), strategies.end());
            }
        }
        if (label.strategies.empty()) label.strategies.insert(std::string(kUnclearStrategy));
        out.retained.push_back(std::move(label));
    }
    return out;
}

namespace {

std::vector<std::string> split_fields(std::string_view line) {
    const char delim = line.find('\t') != std::string_view::npos ? '\t' : ',';
    std::vector<std::string> out;
    std::size_t i = 0;
    while (true) {
        auto j = line.find(delim, i);
        out.emplace_back(trim(line.substr(i, j == std::string_view::npos ? std::string_view::npos : j - i)));
        if (j == std::string_view::npos) break;
        i = j + 1;
    }
    return out;
}

}  // namespace

std::vector<AnnotationSheet> parse_annotation_csv(std::string_view text, const std::string& source) {
    std::vector<AnnotationSheet> out;
    std::size_t line_no = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        auto nl = text.find('\n', i);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = trim(text.substr(i, nl - i));
        i = nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        auto fields = split_fields(line);
        if (line_no == 1 && !fields.empty() && to_lower(fields[0]) == "annotator_id") continue;
        if (fields.size() != 2 + kQuestionCount) {
            throw ParseError(source, line_no, "expected " + std::to_string(2 + kQuestionCount) + " fields, got " +
                                                  std::to_string(fields.size()));
        }
        AnnotationSheet s;
        s.annotator_id = fields[0];
        s.video_id = fields[1];
        if (s.annotator_id.empty() || s.video_id.empty()) throw ParseError(source, line_no, "empty annotator or video id");
        for (std::size_t q = 0; q < kQuestionCount; ++q) {
            const auto v = to_lower(fields[2 + q]);
            if (v == "yes" || v == "y" || v == "1") {
                s.answers[q] = true;
            } else if (v == "no" || v == "n" || v == "0") {
                s.answers[q] = false;
            } else {
                throw ParseError(source, line_no, "q" + std::to_string(q + 1) + ": expected yes or no, got '" +
                                                      fields[2 + q] + "'");
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

void to_json(nlohmann::json& j, const StrategyLabelSet& s) {
    j = {{"video_id", s.video_id},
         {"strategies", s.strategies},
         {"agreement", s.agreement},
         {"n_annotators", s.n_annotators}};
}

void from_json(const nlohmann::json& j, StrategyLabelSet& s) {
    s.video_id = j.at("video_id").get<std::string>();
    s.strategies = j.at("strategies").get<std::set<std::string>>();
    s.agreement = j.at("agreement").get<double>();
    s.n_annotators = j.at("n_annotators").get<int>();
}

}  // namespace storyverb
