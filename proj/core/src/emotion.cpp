#include "storyverb/emotion.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "storyverb/errors.hpp"
#include "storyverb/text.hpp"

namespace storyverb {

namespace {

bool is_category(std::string_view s) {
    return std::find(kEmotionCategories.begin(), kEmotionCategories.end(), s) != kEmotionCategories.end();
}

}  // namespace

EmotionTaxonomy::EmotionTaxonomy(std::map<std::string, std::string> mapping) {
    for (auto& [raw, cat] : mapping) {
        const auto key = to_lower(trim(raw));
        const auto value = to_lower(trim(cat));
        if (key.empty()) throw ParseError("emotion taxonomy", 0, "empty raw label");
        if (!is_category(value)) {
            throw ParseError("emotion taxonomy", 0, "'" + raw + "' maps to unknown category '" + cat + "'");
        }
        mapping_[key] = value;
    }
}

EmotionTaxonomy EmotionTaxonomy::load(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path.string()));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string(), 0, e.what());
    } catch (const std::runtime_error& e) {
        throw ConfigError("data_dir", e.what());
    }
    if (!j.is_object()) throw ParseError(path.string(), 0, "expected an object of raw label -> category");
    std::map<std::string, std::string> m;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_string()) throw ParseError(path.string(), 0, "category of '" + it.key() + "' is not a string");
        m[it.key()] = it.value().get<std::string>();
    }
    return EmotionTaxonomy(std::move(m));
}

std::string EmotionTaxonomy::club(std::string_view raw_label) const {
    const auto key = to_lower(trim(raw_label));
    if (auto it = mapping_.find(key); it != mapping_.end()) return it->second;
    if (is_category(key)) return key;
    throw std::out_of_range("unmapped emotion label '" + std::string(raw_label) + "'");
}

bool EmotionTaxonomy::contains(std::string_view raw_label) const {
    return mapping_.find(to_lower(trim(raw_label))) != mapping_.end();
}

std::vector<std::string> EmotionTaxonomy::raw_labels() const {
    std::vector<std::string> out;
    out.reserve(mapping_.size());
    for (const auto& [k, v] : mapping_) out.push_back(k);
    return out;
}

std::string club_emotion(std::string_view raw_label, const EmotionTaxonomy& taxonomy) {
    return taxonomy.club(raw_label);
}

}  // namespace storyverb
