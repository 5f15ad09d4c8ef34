#include "storyverb/prompt.hpp"

#include <algorithm>
#include <stdexcept>

#include "storyverb/errors.hpp"
#include "storyverb/text.hpp"

namespace storyverb {

PromptTemplates PromptTemplates::parse(std::string_view text, const std::string& source) {
    PromptTemplates t;
    t.source_ = source;
    std::string current;
    std::string body;
    bool in_section = false;
    std::size_t line_no = 0;

    const auto flush = [&] {
        if (!in_section) return;
        while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
        t.sections_[current] = body;
        body.clear();
    };

    std::size_t i = 0;
    while (i <= text.size()) {
        auto nl = text.find('\n', i);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(i, nl - i);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        if (line.substr(0, 2) == "@@") {
            flush();
            current = std::string(trim(line.substr(2)));
            if (current.empty()) throw ParseError(source, line_no, "section without a name");
            if (t.sections_.count(current)) throw ParseError(source, line_no, "duplicate section " + current);
            in_section = true;
        } else if (line.substr(0, 2) != "##" && in_section) {
            body.append(line);
            body.push_back('\n');
        }
        if (nl == text.size()) break;
        i = nl + 1;
    }
    flush();
    return t;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path.string());
    } catch (const std::runtime_error& e) {
        throw ConfigError("templates", e.what());
    }
    return parse(text, path.string());
}

bool PromptTemplates::has(std::string_view section) const {
    return sections_.find(section) != sections_.end();
}

const std::string& PromptTemplates::raw(std::string_view section) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) throw ParseError(source_, 0, "no template section " + std::string(section));
    return it->second;
}

std::string PromptTemplates::render(std::string_view section,
                                    const std::map<std::string, std::string>& vars) const {
    const std::string& tmpl = raw(section);
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        auto open = tmpl.find("{{", i);
        if (open == std::string::npos) {
            out.append(tmpl, i);
            break;
        }
        auto close = tmpl.find("}}", open + 2);
        if (close == std::string::npos) throw ParseError(source_, 0, "unterminated placeholder in " + std::string(section));
        out.append(tmpl, i, open - i);
        const std::string name(trim(std::string_view(tmpl).substr(open + 2, close - open - 2)));
        auto v = vars.find(name);
        if (v == vars.end()) throw ParseError(source_, 0, "unbound placeholder {{" + name + "}} in " + std::string(section));
        out += v->second;
        i = close + 2;
    }
    return out;
}

double token_jaccard(std::string_view a, std::string_view b) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
    for (auto& t : word_tokens(a)) ++counts[t].first;
    for (auto& t : word_tokens(b)) ++counts[t].second;
    if (counts.empty()) return 1.0;
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (const auto& [tok, c] : counts) {
        inter += std::min(c.first, c.second);
        uni += std::max(c.first, c.second);
    }
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::string> dedup_texts(const std::vector<std::string>& texts, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("dedup threshold outside [0, 1]");
    std::vector<std::string> kept;
    for (const auto& t : texts) {
        const bool similar = std::any_of(kept.begin(), kept.end(),
                                         [&](const std::string& k) { return token_jaccard(k, t) >= threshold; });
        if (!similar) kept.push_back(t);
    }
    return kept;
}

std::string render_story_prompt(const std::string& instruction, const std::vector<SignalBlock>& blocks) {
    std::string out = instruction;
    out += '\n';
    for (const auto& b : blocks) {
        out += '\n';
        out += b.label;
        out += ":\n";
        for (const auto& line : b.lines) {
            out += line;
            out += '\n';
        }
    }
    return out;
}

namespace {

// Newlines inside a signal would break the one-line-per-item layout.
std::string one_line(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : trim(s)) {
        if (c == '\n' || c == '\r' || c == '\t') c = ' ';
        if (c == ' ') {
            if (!space) out += c;
            space = true;
        } else {
            out += c;
            space = false;
        }
    }
    return out;
}

SignalBlock metadata_block(const VerbalBundle& bundle, const VideoAsset& video,
                           const PromptTemplates& templates) {
    SignalBlock b{templates.raw("label_metadata"), {}};
    const std::string title = one_line(bundle.title.empty() ? video.title : bundle.title);
    if (!title.empty()) b.lines.push_back("Title: " + title);
    const auto& m = bundle.metadata;
    if (m.resolved()) {
        if (m.company) b.lines.push_back("Brand: " + one_line(*m.company));
        if (m.product_line) b.lines.push_back("Product line: " + one_line(*m.product_line));
        if (m.description) b.lines.push_back("About the brand: " + one_line(*m.description));
    }
    return b;
}

SignalBlock caption_block(const VerbalBundle& bundle, const PipelineConfig& cfg,
                          const PromptTemplates& templates) {
    std::vector<std::string> texts;
    texts.reserve(bundle.captions.size());
    for (const auto& c : bundle.captions) texts.push_back(one_line(c.caption));
    const auto kept = dedup_texts(texts, cfg.dedup_jaccard);

    SignalBlock b{templates.raw("label_captions"), {}};
    std::size_t k = 0;
    for (std::size_t i = 0; i < bundle.captions.size() && k < kept.size(); ++i) {
        if (texts[i] != kept[k]) continue;
        ++k;
        const auto& c = bundle.captions[i];
        std::string line = "[" + format_real(c.timestamp_s) + "s] " + texts[i];
        if (!c.objects.empty()) line += " (objects: " + join(c.objects, ", ") + ")";
        b.lines.push_back(std::move(line));
    }
    return b;
}

SignalBlock ocr_block(const VerbalBundle& bundle, const PromptTemplates& templates) {
    SignalBlock b{templates.raw("label_ocr"), {}};
    if (!bundle.ocr.empty()) b.lines.push_back(join(bundle.ocr.words(), " "));
    return b;
}

SignalBlock transcript_block(const VerbalBundle& bundle, const PipelineConfig& cfg,
                             const PromptTemplates& templates) {
    SignalBlock b{templates.raw("label_transcript"), {}};
    if (!bundle.transcript) return b;
    std::vector<std::string> texts;
    for (const auto& s : bundle.transcript->segments) {
        auto t = one_line(s.text);
        if (!t.empty()) texts.push_back(std::move(t));
    }
    // Repeated subtitle lines carry no new information either.
    std::vector<std::string> kept = dedup_texts(texts, cfg.dedup_jaccard);
    std::size_t k = 0;
    for (const auto& s : bundle.transcript->segments) {
        auto t = one_line(s.text);
        if (k < kept.size() && t == kept[k]) {
            ++k;
            b.lines.push_back("[" + format_real(s.start_s) + "s] " + t);
        }
    }
    return b;
}

}  // namespace

StoryPrompt assemble_story_prompt(const VerbalBundle& bundle, const VideoAsset& video,
                                  const PipelineConfig& cfg, const PromptTemplates& templates) {
    const bool is_short = video.duration_s < cfg.short_video_max_s;
    const bool has_captions = !bundle.captions.empty();
    const bool has_transcript = bundle.transcript && !bundle.transcript->segments.empty();
    const bool has_signal = has_captions || has_transcript ||
                            (is_short && (!bundle.ocr.empty() || bundle.metadata.resolved()));
    if (!has_signal) throw StageError(bundle.video_id + ": nothing to verbalize");

    std::map<std::string, std::string> vars;
    vars["title"] = one_line(bundle.title.empty() ? video.title : bundle.title);
    std::string section = is_short ? "instruction_short" : "instruction_long";
    if (is_short && bundle.metadata.resolved() && bundle.metadata.company) {
        section = "instruction_brand";
        vars["brand"] = one_line(*bundle.metadata.company);
    }

    StoryPrompt p;
    p.instruction = templates.render(section, vars);
    std::vector<SignalBlock> blocks;
    if (is_short) blocks.push_back(metadata_block(bundle, video, templates));
    blocks.push_back(caption_block(bundle, cfg, templates));
    if (is_short) blocks.push_back(ocr_block(bundle, templates));
    blocks.push_back(transcript_block(bundle, cfg, templates));
    for (auto& b : blocks) {
        if (!b.lines.empty()) p.signal_blocks.push_back(std::move(b));
    }

    p.rendered = render_story_prompt(p.instruction, p.signal_blocks);
    const auto budget = static_cast<std::size_t>(cfg.prompt_char_budget);
    while (p.rendered.size() > budget) {
        if (p.signal_blocks.empty()) {
            throw StageError(bundle.video_id + ": prompt budget of " + std::to_string(budget) +
                             " characters leaves no room for signals");
        }
        auto& last = p.signal_blocks.back();
        last.lines.pop_back();
        if (last.lines.empty()) p.signal_blocks.pop_back();
        p.rendered = render_story_prompt(p.instruction, p.signal_blocks);
    }
    if (p.signal_blocks.empty()) {
        throw StageError(bundle.video_id + ": prompt budget of " + std::to_string(budget) +
                         " characters leaves no room for signals");
    }
    p.char_count = p.rendered.size();
    return p;
}

TaskPrompt assemble_task_prompt(const TaskSpec& task, const GeneratedStory& story,
                                const PromptTemplates& templates,
                                const std::optional<std::string>& context) {
    TaskPrompt p;
    p.task_id = std::string(to_string(task.id));
    p.description = task.description;
    p.options = task.options;
    p.story = story.text;
    if (task.description.empty()) throw std::invalid_argument(p.task_id + ": task has no description");

    std::map<std::string, std::string> vars{{"description", task.description}, {"story", std::string(trim(story.text))}};
    if (has_options(task.id)) {
        if (task.options.empty()) throw std::invalid_argument(p.task_id + ": option task without options");
        std::string listing;
        for (std::size_t i = 0; i < task.options.size(); ++i) {
            if (i) listing += '\n';
            listing += std::to_string(i + 1) + ". " + one_line(task.options[i]);
        }
        vars["options"] = listing;
        p.rendered = templates.render("option_task", vars);
    } else if (context) {
        vars["context"] = one_line(*context);
        p.rendered = templates.render("generation_task_with_context", vars);
    } else {
        p.rendered = templates.render("generation_task", vars);
    }
    return p;
}

}  // namespace storyverb
