#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace storyverb {

// Content-addressed on-disk records. Each file carries the payload length and
// SHA-256 so a truncated or edited record is detected on read.
class ArtifactStore {
public:
    explicit ArtifactStore(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }

    void store(const std::string& key, std::string_view payload);
    // nullopt on a miss. Throws CorruptArtifact on a damaged record.
    std::optional<std::string> load(const std::string& key) const;
    bool contains(const std::string& key) const;

    void store_json(const std::string& key, const nlohmann::json& value);
    std::optional<nlohmann::json> load_json(const std::string& key) const;

    std::vector<std::string> keys() const;
    // Keys whose records fail the integrity check.
    std::vector<std::string> verify() const;
    std::size_t clear();

    std::filesystem::path path_for(const std::string& key) const;

private:
    std::filesystem::path dir_;
};

}  // namespace storyverb
