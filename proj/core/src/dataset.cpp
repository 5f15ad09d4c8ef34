#include "storyverb/dataset.hpp"

#include <algorithm>
#include <set>

#include <spdlog/spdlog.h>

#include "storyverb/errors.hpp"
#include "storyverb/text.hpp"

namespace storyverb {

namespace fs = std::filesystem;

std::string_view to_string(DatasetName name) {
    switch (name) {
        case DatasetName::video_story: return "video_story";
        case DatasetName::video_ads: return "video_ads";
        case DatasetName::persuasion: return "persuasion";
    }
    return "?";
}

DatasetName dataset_from_string(std::string_view name) {
    for (auto n : {DatasetName::video_story, DatasetName::video_ads, DatasetName::persuasion}) {
        if (to_string(n) == name) return n;
    }
    throw std::invalid_argument("unknown dataset '" + std::string(name) + "'");
}

std::string AdsLabels::majority_emotion() const {
    std::string best;
    std::size_t best_count = 0;
    for (const auto& e : emotions) {
        const auto c = static_cast<std::size_t>(std::count(emotions.begin(), emotions.end(), e));
        if (c > best_count) {
            best = e;
            best_count = c;
        }
    }
    return best;
}

fs::path DatasetManifest::sidecar(const std::string& video_id) const {
    return root / "videos" / video_id;
}

std::optional<fs::path> DatasetManifest::frames_dir(const std::string& video_id) const {
    auto p = sidecar(video_id) / "frames";
    std::error_code ec;
    if (fs::is_directory(p, ec)) return p;
    return std::nullopt;
}

std::optional<fs::path> DatasetManifest::subtitles(const std::string& video_id) const {
    for (const char* name : {"subtitles.srt", "subtitles.json"}) {
        auto p = sidecar(video_id) / name;
        std::error_code ec;
        if (fs::is_regular_file(p, ec)) return p;
    }
    return std::nullopt;
}

const VideoAsset& DatasetManifest::video(const std::string& video_id) const {
    for (const auto& v : items) {
        if (v.video_id == video_id) return v;
    }
    throw DatasetError("no video " + video_id + " in " + std::string(to_string(name)));
}

namespace {

std::string require_text(const nlohmann::json& j, const char* field, const std::string& where) {
    auto it = j.find(field);
    if (it == j.end() || !it->is_string()) throw DatasetError(where + ": '" + field + "' must be a string");
    std::string s(trim(it->get<std::string>()));
    if (s.empty()) throw DatasetError(where + ": '" + field + "' is empty");
    return s;
}

std::vector<std::string> require_texts(const nlohmann::json& j, const char* field, const std::string& where) {
    auto it = j.find(field);
    if (it == j.end() || !it->is_array()) throw DatasetError(where + ": '" + field + "' must be a list");
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string() || trim(v.get<std::string>()).empty()) {
            throw DatasetError(where + ": '" + field + "' holds an empty or non-string entry");
        }
        out.emplace_back(trim(v.get<std::string>()));
    }
    return out;
}

AdsLabels parse_ads(const nlohmann::json& j, const std::string& where, const TaskCatalog& catalog) {
    AdsLabels a;
    a.topic = require_text(j, "topic", where);
    if (std::find(catalog.topics.begin(), catalog.topics.end(), a.topic) == catalog.topics.end()) {
        throw DatasetError(where + ": topic '" + a.topic + "' is not in the topic vocabulary");
    }
    for (auto e : require_texts(j, "emotions", where)) {
        e = to_lower(e);
        if (!catalog.emotions.contains(e)) {
            spdlog::warn("{}: emotion '{}' is not in the taxonomy, using 'unclear'", where, e);
            e = "unclear";
        }
        a.emotions.push_back(std::move(e));
    }
    if (a.emotions.empty()) throw DatasetError(where + ": no emotion labels");
    a.actions = require_texts(j, "actions", where);
    a.reasons = require_texts(j, "reasons", where);
    if (a.actions.size() != kStatementsPerVideo || a.reasons.size() != kStatementsPerVideo) {
        throw DatasetError(where + ": expected " + std::to_string(kStatementsPerVideo) +
                           " action and reason statements, got " + std::to_string(a.actions.size()) + " and " +
                           std::to_string(a.reasons.size()));
    }
    return a;
}

StrategyLabelSet parse_persuasion(const nlohmann::json& j, const std::string& video_id, const std::string& where,
                                  const TaskCatalog& catalog) {
    StrategyLabelSet s;
    s.video_id = video_id;
    for (const auto& name : require_texts(j, "strategies", where)) {
        if (std::find(catalog.strategies.begin(), catalog.strategies.end(), name) == catalog.strategies.end()) {
            throw DatasetError(where + ": strategy '" + name + "' is not in the strategy vocabulary");
        }
        s.strategies.insert(name);
    }
    if (s.strategies.empty()) throw DatasetError(where + ": empty strategy set");
    if (!j.contains("agreement") || !j["agreement"].is_number()) throw DatasetError(where + ": 'agreement' must be a number");
    if (!j.contains("n_annotators") || !j["n_annotators"].is_number_integer()) {
        throw DatasetError(where + ": 'n_annotators' must be an integer");
    }
    s.agreement = j["agreement"].get<double>();
    s.n_annotators = j["n_annotators"].get<int>();
    if (s.agreement < 0.0 || s.agreement > 1.0) throw DatasetError(where + ": agreement outside [0, 1]");
    if (s.n_annotators < 2) throw DatasetError(where + ": fewer than two annotators");
    return s;
}

}  // namespace

DatasetManifest load_dataset(DatasetName name, const fs::path& root, const TaskCatalog& catalog) {
    DatasetManifest m;
    m.name = name;
    m.root = root;
    const auto manifest_path = root / "manifest.jsonl";
    std::string text;
    try {
        text = read_file(manifest_path.string());
    } catch (const std::runtime_error& e) {
        throw DatasetError(e.what());
    }

    std::set<std::string> ids;
    std::size_t line_no = 0;
    for (std::size_t i = 0; i < text.size();) {
        auto nl = text.find('\n', i);
        if (nl == std::string::npos) nl = text.size();
        const auto line = trim(std::string_view(text).substr(i, nl - i));
        i = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        const std::string where = manifest_path.string() + ":" + std::to_string(line_no);
        VideoAsset v;
        try {
            v = nlohmann::json::parse(line).get<VideoAsset>();
        } catch (const nlohmann::json::exception& e) {
            throw DatasetError(where + ": " + e.what());
        }
        check_video(v);
        if (!ids.insert(v.video_id).second) throw DatasetError(where + ": duplicate video id " + v.video_id);
        m.items.push_back(std::move(v));
    }

    for (const auto& v : m.items) {
        const auto label_path = m.sidecar(v.video_id) / "labels.json";
        const std::string where = label_path.string();
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file(label_path.string()));
        } catch (const nlohmann::json::parse_error& e) {
            throw DatasetError(where + ": " + e.what());
        } catch (const std::runtime_error&) {
            throw DatasetError(v.video_id + ": missing labels file " + where);
        }
        if (!j.is_object()) throw DatasetError(where + ": expected an object");
        switch (name) {
            case DatasetName::video_story:
                m.stories[v.video_id] = require_text(j, "story", where);
                break;
            case DatasetName::video_ads:
                m.ads[v.video_id] = parse_ads(j, where, catalog);
                break;
            case DatasetName::persuasion:
                m.persuasion[v.video_id] = parse_persuasion(j, v.video_id, where, catalog);
                break;
        }
    }
    return m;
}

CorpusStats corpus_stats(const DatasetManifest& manifest) {
    CorpusStats s;
    s.items = manifest.items.size();
    double duration = 0;
    for (const auto& v : manifest.items) {
        duration += v.duration_s;
        if (manifest.frames_dir(v.video_id)) ++s.with_media;
    }
    if (s.items) s.mean_duration_s = duration / static_cast<double>(s.items);

    if (!manifest.stories.empty()) {
        double words = 0;
        for (const auto& [id, story] : manifest.stories) words += static_cast<double>(count_words(story));
        s.mean_story_words = words / static_cast<double>(manifest.stories.size());
    }
    for (const auto& [id, a] : manifest.ads) ++s.label_histogram[a.topic];
    for (const auto& [id, p] : manifest.persuasion) {
        for (const auto& strategy : p.strategies) ++s.label_histogram[strategy];
    }
    return s;
}

nlohmann::json to_json(const CorpusStats& stats) {
    return {{"items", stats.items},
            {"with_media", stats.with_media},
            {"mean_duration_s", stats.mean_duration_s},
            {"mean_story_words", stats.mean_story_words},
            {"label_histogram", stats.label_histogram}};
}

}  // namespace storyverb
