#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace storyverb {

inline constexpr std::array<std::string_view, 7> kEmotionCategories = {
    "joy", "trust", "fear", "anger", "disgust", "anticipation", "unclear"};

// Raw annotator emotion -> one of the seven clubbed categories.
class EmotionTaxonomy {
public:
    // Throws ParseError if any image is not a category.
    explicit EmotionTaxonomy(std::map<std::string, std::string> mapping);
    // JSON object {"raw": "category", ...}.
    static EmotionTaxonomy load(const std::filesystem::path& path);

    // Category names map to themselves. Case-insensitive. Throws
    // std::out_of_range for an unmapped label.
    std::string club(std::string_view raw_label) const;
    bool contains(std::string_view raw_label) const;
    // Raw labels in file order (sorted).
    std::vector<std::string> raw_labels() const;
    std::size_t size() const { return mapping_.size(); }

private:
    std::map<std::string, std::string, std::less<>> mapping_;
};

std::string club_emotion(std::string_view raw_label, const EmotionTaxonomy& taxonomy);

}  // namespace storyverb
