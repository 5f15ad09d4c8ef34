#include "storyverb/tasks.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <stdexcept>

#include "storyverb/digest.hpp"
#include "storyverb/errors.hpp"
#include "storyverb/retrieval.hpp"
#include "storyverb/text.hpp"

namespace storyverb {

namespace {

constexpr std::array<std::pair<TaskId, std::string_view>, 9> kTaskNames{{
    {TaskId::topic, "topic"},
    {TaskId::emotion, "emotion"},
    {TaskId::emotion_clubbed, "emotion_clubbed"},
    {TaskId::persuasion, "persuasion"},
    {TaskId::action_retrieval, "action_retrieval"},
    {TaskId::reason_retrieval, "reason_retrieval"},
    {TaskId::action_gen, "action_gen"},
    {TaskId::reason_gen, "reason_gen"},
    {TaskId::reason_given_action, "reason_given_action"},
}};

nlohmann::json parse_json_file(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path.string());
    } catch (const std::runtime_error& e) {
        throw ConfigError("data_dir", e.what());
    }
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string(), 0, e.what());
    }
}

// Lowercase; every non-word character becomes a single separating space.
std::string label_form(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char ch : s) {
        auto c = static_cast<unsigned char>(ch);
        if (is_word_char(c)) {
            if (pending_space && !out.empty()) out += ' ';
            pending_space = false;
            out += static_cast<char>(std::tolower(c));
        } else {
            pending_space = true;
        }
    }
    return out;
}

bool contains_words(const std::string& haystack, const std::string& needle) {
    if (needle.empty()) return false;
    return (" " + haystack + " ").find(" " + needle + " ") != std::string::npos;
}

GenerationRequest task_request(const std::string& prompt, const StoryContext& ctx) {
    return {prompt, ctx.cfg.task_temperature, ctx.cfg.max_output_chars, ctx.backend_id};
}

}  // namespace

std::string_view to_string(TaskId id) {
    for (const auto& [t, name] : kTaskNames) {
        if (t == id) return name;
    }
    return "?";
}

TaskId task_from_string(std::string_view name) {
    for (const auto& [t, n] : kTaskNames) {
        if (n == name) return t;
    }
    throw std::invalid_argument("unknown task '" + std::string(name) + "'");
}

TaskKind kind_of(TaskId id) {
    switch (id) {
        case TaskId::topic:
        case TaskId::emotion:
        case TaskId::emotion_clubbed:
        case TaskId::persuasion:
            return TaskKind::classification;
        case TaskId::action_retrieval:
        case TaskId::reason_retrieval:
            return TaskKind::retrieval;
        default:
            return TaskKind::generation;
    }
}

std::size_t count_words(std::string_view text) {
    return split_whitespace(text).size();
}

void to_json(nlohmann::json& j, const GeneratedStory& s) {
    j = {{"video_id", s.video_id},
         {"text", s.text},
         {"word_count", s.word_count},
         {"backend_id", s.request.backend_id},
         {"temperature", s.request.temperature},
         {"max_output_chars", s.request.max_output_chars},
         {"prompt_digest", s.prompt_digest}};
}

void from_json(const nlohmann::json& j, GeneratedStory& s) {
    s.video_id = j.at("video_id").get<std::string>();
    s.text = j.at("text").get<std::string>();
    s.word_count = j.value("word_count", count_words(s.text));
    s.request.backend_id = j.value("backend_id", std::string{});
    s.request.temperature = j.value("temperature", 0.75);
    s.request.max_output_chars = j.value("max_output_chars", 4000);
    s.prompt_digest = j.value("prompt_digest", std::string{});
}

void to_json(nlohmann::json& j, const Prediction& p) {
    j = nlohmann::json::object();
    j["video_id"] = p.video_id;
    j["task_id"] = std::string(to_string(p.task_id));
    if (kind_of(p.task_id) == TaskKind::generation) {
        j["text"] = p.text.value_or("");
    } else {
        j["label"] = p.label ? nlohmann::json(*p.label) : nlohmann::json(nullptr);
    }
    j["raw_response"] = p.raw_response;
    j["backend_id"] = p.backend_id;
    j["prompt_digest"] = p.prompt_digest;
}

void from_json(const nlohmann::json& j, Prediction& p) {
    p.video_id = j.at("video_id").get<std::string>();
    p.task_id = task_from_string(j.at("task_id").get<std::string>());
    p.label.reset();
    p.text.reset();
    if (auto it = j.find("label"); it != j.end() && it->is_string()) p.label = it->get<std::string>();
    if (auto it = j.find("text"); it != j.end() && it->is_string()) p.text = it->get<std::string>();
    p.raw_response = j.value("raw_response", std::string{});
    p.backend_id = j.value("backend_id", std::string{});
    p.prompt_digest = j.value("prompt_digest", std::string{});
}

// ---- catalog ------------------------------------------------------------------

TaskCatalog TaskCatalog::load(const std::filesystem::path& data_dir) {
    TaskCatalog c{{}, {}, {}, EmotionTaxonomy::load(data_dir / "emotion_taxonomy.json")};

    const auto tasks = parse_json_file(data_dir / "tasks.json");
    for (const auto& [t, name] : kTaskNames) {
        auto it = tasks.find(std::string(name));
        if (it == tasks.end() || !it->is_string() || it->get<std::string>().empty()) {
            throw ParseError((data_dir / "tasks.json").string(), 0, "missing description for task " + std::string(name));
        }
        c.descriptions[t] = it->get<std::string>();
    }

    std::ifstream topics(data_dir / "topics.txt");
    if (!topics) throw ConfigError("data_dir", "cannot open " + (data_dir / "topics.txt").string());
    for (std::string line; std::getline(topics, line);) {
        auto t = trim(line);
        if (!t.empty() && t.front() != '#') c.topics.emplace_back(t);
    }

    const auto questions = parse_json_file(data_dir / "persuasion_questions.json");
    c.strategies = questions.at("strategies").get<std::vector<std::string>>();
    return c;
}

TaskSpec TaskCatalog::spec(TaskId id, std::vector<std::string> options) const {
    TaskSpec s;
    s.id = id;
    s.description = descriptions.at(id);
    switch (id) {
        case TaskId::topic:
            s.options = topics;
            break;
        case TaskId::emotion:
            s.options = emotions.raw_labels();
            break;
        case TaskId::emotion_clubbed:
            s.options.assign(kEmotionCategories.begin(), kEmotionCategories.end());
            break;
        case TaskId::persuasion:
            s.options = strategies;
            break;
        case TaskId::action_retrieval:
        case TaskId::reason_retrieval:
            if (options.size() != kRetrievalOptions) {
                throw std::invalid_argument("retrieval task needs " + std::to_string(kRetrievalOptions) +
                                            " options, got " + std::to_string(options.size()));
            }
            s.options = std::move(options);
            break;
        default:
            break;
    }
    return s;
}

// ---- running ------------------------------------------------------------------

GeneratedStory generate_story(const VerbalBundle& bundle, const VideoAsset& video, const StoryContext& ctx) {
    const auto prompt = assemble_story_prompt(bundle, video, ctx.cfg, ctx.templates);
    GeneratedStory s;
    s.video_id = bundle.video_id;
    s.request = {prompt.rendered, ctx.cfg.story_temperature, ctx.cfg.max_output_chars, ctx.backend_id};
    s.prompt_digest = sha256_hex(prompt.rendered);
    GenerationResponse resp;
    try {
        resp = ctx.gateway.generate(s.request);
    } catch (const BackendError& e) {
        throw StageError(bundle.video_id + ": story generation failed: " + e.what());
    }
    s.text = std::string(trim(resp.text));
    if (s.text.empty()) throw StageError(bundle.video_id + ": backend returned an empty story");
    s.word_count = count_words(s.text);
    return s;
}

std::optional<std::string> parse_label(std::string_view raw, const std::vector<std::string>& options) {
    const auto answer = label_form(raw);
    std::vector<std::string> forms;
    forms.reserve(options.size());
    for (const auto& o : options) forms.push_back(label_form(o));

    for (std::size_t i = 0; i < options.size(); ++i) {
        if (!forms[i].empty() && forms[i] == answer) return options[i];
    }

    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < options.size(); ++i) {
        if (contains_words(answer, forms[i])) hits.push_back(i);
    }
    std::vector<std::size_t> maximal;
    for (auto i : hits) {
        const bool inside_longer = std::any_of(hits.begin(), hits.end(), [&](std::size_t j) {
            return forms[j].size() > forms[i].size() && contains_words(forms[j], forms[i]);
        });
        if (!inside_longer) maximal.push_back(i);
    }
    // The same label listed twice is still one answer.
    if (!maximal.empty() &&
        std::all_of(maximal.begin(), maximal.end(), [&](std::size_t i) { return forms[i] == forms[maximal[0]]; })) {
        return options[maximal[0]];
    }
    return std::nullopt;
}

std::optional<std::string> unknown_option(const std::vector<std::string>& options) {
    for (const auto& o : options) {
        if (to_lower(trim(o)) == "unclear") return o;
    }
    return std::nullopt;
}

Prediction classify(const TaskSpec& task, const GeneratedStory& story, const StoryContext& ctx) {
    if (!has_options(task.id)) throw std::invalid_argument(std::string(to_string(task.id)) + " is not an option task");
    const auto prompt = assemble_task_prompt(task, story, ctx.templates);
    const auto resp = ctx.gateway.generate(task_request(prompt.rendered, ctx));
    Prediction p;
    p.video_id = story.video_id;
    p.task_id = task.id;
    p.raw_response = resp.text;
    p.backend_id = resp.backend_id;
    p.prompt_digest = sha256_hex(prompt.rendered);
    p.label = parse_label(resp.text, task.options);
    if (!p.label) p.label = unknown_option(task.options);
    return p;
}

Prediction generate_statement(StatementKind kind, const GeneratedStory& story,
                              const std::optional<std::string>& context,
                              const TaskCatalog& catalog, const StoryContext& ctx) {
    TaskId id = TaskId::action_gen;
    if (kind == StatementKind::reason) id = TaskId::reason_gen;
    if (kind == StatementKind::reason_given_action) {
        id = TaskId::reason_given_action;
        if (!context || trim(*context).empty()) throw std::invalid_argument("reason_given_action needs an action statement");
    }
    if (trim(story.text).empty()) throw std::invalid_argument(story.video_id + ": empty story");

    const auto spec = catalog.spec(id);
    const auto prompt = assemble_task_prompt(
        spec, story, ctx.templates, kind == StatementKind::reason_given_action ? context : std::nullopt);
    const auto resp = ctx.gateway.generate(task_request(prompt.rendered, ctx));
    Prediction p;
    p.video_id = story.video_id;
    p.task_id = id;
    p.raw_response = resp.text;
    p.text = std::string(trim(resp.text));
    p.backend_id = resp.backend_id;
    p.prompt_digest = sha256_hex(prompt.rendered);
    return p;
}

}  // namespace storyverb
