#include "storyverb/signals.hpp"

#include <cctype>
#include <cstring>

#include <spdlog/spdlog.h>

#include "storyverb/backends.hpp"
#include "storyverb/errors.hpp"
#include "storyverb/text.hpp"

namespace storyverb {

namespace {

// Edge symbols that carry meaning in on-screen text ("50%", "$5", "#1").
bool keep_at_edge(unsigned char c) {
    return std::strchr("%$#&+@", c) != nullptr && c != '\0';
}

bool strip_at_edge(unsigned char c) {
    if (is_word_char(c)) return false;
    if (keep_at_edge(c)) return false;
    return std::ispunct(c) || std::isspace(c);
}

}  // namespace

std::string normalize_ocr_token(std::string_view token) {
    while (!token.empty() && strip_at_edge(static_cast<unsigned char>(token.front()))) token.remove_prefix(1);
    while (!token.empty() && strip_at_edge(static_cast<unsigned char>(token.back()))) token.remove_suffix(1);
    return to_lower(token);
}

void OcrWords::add(std::string_view raw_token) {
    std::string w = normalize_ocr_token(raw_token);
    if (w.empty()) return;
    if (seen_.insert(w).second) words_.push_back(std::move(w));
}

std::vector<std::string> parse_object_list(std::string_view answer) {
    std::string text = to_lower(answer);
    // " and " separates list items just like commas do.
    for (std::size_t pos; (pos = text.find(" and ")) != std::string::npos;) text.replace(pos, 5, ",");
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find_first_of(",;\n", start);
        if (end == std::string::npos) end = text.size();
        std::string_view item(text.data() + start, end - start);
        item = trim(item);
        while (!item.empty() && std::ispunct(static_cast<unsigned char>(item.back()))) item.remove_suffix(1);
        for (std::string_view article : {"a ", "an ", "the ", "some "}) {
            if (item.substr(0, article.size()) == article) {
                item.remove_prefix(article.size());
                break;
            }
        }
        item = trim(item);
        if (!item.empty() && seen.insert(std::string(item)).second) out.emplace_back(item);
        start = end + 1;
    }
    return out;
}

CaptionResult caption_frames(const std::string& video_id, const KeyframeSet& keyframes,
                             CaptionBackend& backend) {
    CaptionResult result;
    for (const Frame& frame : keyframes.frames) {
        ImageRequest req{video_id, frame.index, &frame, std::string(kCaptionPrompt)};
        try {
            FrameCaption fc;
            fc.frame_index = frame.index;
            fc.timestamp_s = frame.timestamp_s;
            fc.caption = std::string(trim(backend.describe(req)));
            req.prompt = std::string(kObjectsPrompt);
            fc.objects = parse_object_list(backend.describe(req));
            if (fc.caption.empty()) throw BackendError("empty caption", false);
            result.captions.push_back(std::move(fc));
        } catch (const BackendError& e) {
            spdlog::warn("caption failed for {} frame {}: {}", video_id, frame.index, e.what());
            result.failures.push_back({frame.index, e.what()});
        }
    }
    if (!keyframes.frames.empty() && result.captions.empty()) {
        throw StageError("captioning failed for every keyframe of " + video_id);
    }
    return result;
}

OcrWords extract_ocr_words(const std::string& video_id, const std::vector<Frame>& frames,
                           OcrBackend& backend) {
    OcrWords words;
    std::size_t failed = 0;
    for (const Frame& frame : frames) {
        ImageRequest req{video_id, frame.index, &frame, {}};
        try {
            for (const auto& tok : split_whitespace(backend.read_text(req))) words.add(tok);
        } catch (const BackendError& e) {
            ++failed;
            spdlog::warn("ocr failed for {} frame {}: {}", video_id, frame.index, e.what());
        }
    }
    if (!frames.empty() && failed == frames.size()) {
        spdlog::warn("ocr failed for every sampled frame of {}", video_id);
    }
    return words;
}

BrandMetadata fetch_brand_metadata(const VideoAsset& video, KnowledgeBackend& backend) {
    if (!video.is_advertisement) return {};
    if (!video.channel || video.channel->empty()) {
        spdlog::warn("{} is an advertisement without a channel name; skipping brand lookup", video.video_id);
        return {};
    }
    try {
        BrandMetadata m = backend.lookup(*video.channel);
        if (!m.company && !m.product_line && !m.description) return {};
        m.source = MetadataSource::knowledge_base;
        return m;
    } catch (const BackendError& e) {
        spdlog::warn("brand lookup failed for {} ({}): {}", video.video_id, *video.channel, e.what());
        return {};
    }
}

// ---- JSON -------------------------------------------------------------------

void to_json(nlohmann::json& j, const FrameCaption& c) {
    j = {{"frame_index", c.frame_index}, {"timestamp_s", c.timestamp_s}, {"caption", c.caption}, {"objects", c.objects}};
}

void from_json(const nlohmann::json& j, FrameCaption& c) {
    c.frame_index = j.at("frame_index").get<std::int64_t>();
    c.timestamp_s = j.value("timestamp_s", 0.0);
    c.caption = j.at("caption").get<std::string>();
    c.objects = j.value("objects", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const Transcript& t) {
    j = nlohmann::json::array();
    for (const auto& s : t.segments) j.push_back({{"start", s.start_s}, {"dur", s.dur_s}, {"text", s.text}});
}

void from_json(const nlohmann::json& j, Transcript& t) {
    t.segments.clear();
    for (const auto& s : j) {
        t.segments.push_back({s.at("start").get<double>(), s.at("dur").get<double>(), s.at("text").get<std::string>()});
    }
}

void to_json(nlohmann::json& j, const BrandMetadata& m) {
    j = {{"source", m.resolved() ? "knowledge_base" : "none"}};
    if (m.company) j["company"] = *m.company;
    if (m.product_line) j["product_line"] = *m.product_line;
    if (m.description) j["description"] = *m.description;
}

void from_json(const nlohmann::json& j, BrandMetadata& m) {
    m = {};
    if (j.value("source", std::string("none")) != "knowledge_base") return;
    m.source = MetadataSource::knowledge_base;
    if (j.contains("company")) m.company = j["company"].get<std::string>();
    if (j.contains("product_line")) m.product_line = j["product_line"].get<std::string>();
    if (j.contains("description")) m.description = j["description"].get<std::string>();
}

void to_json(nlohmann::json& j, const VerbalBundle& b) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : b.caption_failures) failures.push_back({{"frame_index", f.frame_index}, {"reason", f.reason}});
    j = {{"video_id", b.video_id},
         {"title", b.title},
         {"metadata", b.metadata},
         {"keyframe_method", b.keyframe_method},
         {"captions", b.captions},
         {"caption_failures", failures},
         {"ocr", b.ocr.words()},
         {"transcript", b.transcript ? nlohmann::json(*b.transcript) : nlohmann::json(nullptr)}};
}

void from_json(const nlohmann::json& j, VerbalBundle& b) {
    b = {};
    b.video_id = j.at("video_id").get<std::string>();
    b.title = j.value("title", std::string{});
    b.metadata = j.at("metadata").get<BrandMetadata>();
    b.keyframe_method = j.value("keyframe_method", std::string{});
    b.captions = j.at("captions").get<std::vector<FrameCaption>>();
    for (const auto& f : j.value("caption_failures", nlohmann::json::array()))
        b.caption_failures.push_back({f.at("frame_index").get<std::int64_t>(), f.at("reason").get<std::string>()});
    for (const auto& w : j.at("ocr")) b.ocr.add(w.get<std::string>());
    if (j.contains("transcript") && !j["transcript"].is_null()) b.transcript = j["transcript"].get<Transcript>();
}

}  // namespace storyverb
