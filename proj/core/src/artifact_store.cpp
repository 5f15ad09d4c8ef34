#include "storyverb/artifact_store.hpp"

#include <algorithm>
#include <charconv>

#include "storyverb/digest.hpp"
#include "storyverb/errors.hpp"
#include "storyverb/text.hpp"

namespace storyverb {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kMagic = "storyverb-artifact 1\n";
constexpr std::string_view kSuffix = ".rec";

void check_key(const std::string& key) {
    const bool ok = !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '-';
    });
    if (!ok) throw std::invalid_argument("invalid artifact key '" + key + "'");
}

// Payload of a well-formed record, or an explanation of what is wrong.
std::string decode_record(const std::string& raw, const std::string& key) {
    const auto bad = [&](const std::string& why) { return CorruptArtifact("artifact " + key + ": " + why); };
    if (raw.compare(0, kMagic.size(), kMagic) != 0) throw bad("bad header");
    const auto d_end = raw.find('\n', kMagic.size());
    if (d_end == std::string::npos) throw bad("truncated header");
    const auto l_end = raw.find('\n', d_end + 1);
    if (l_end == std::string::npos) throw bad("truncated header");
    const std::string digest = raw.substr(kMagic.size(), d_end - kMagic.size());
    std::size_t len = 0;
    const char* lb = raw.data() + d_end + 1;
    const char* le = raw.data() + l_end;
    if (auto [p, ec] = std::from_chars(lb, le, len); ec != std::errc{} || p != le) throw bad("bad length field");
    std::string payload = raw.substr(l_end + 1);
    if (payload.size() != len) {
        throw bad("expected " + std::to_string(len) + " payload bytes, found " + std::to_string(payload.size()));
    }
    if (sha256_hex(payload) != digest) throw bad("digest mismatch");
    return payload;
}

}  // namespace

ArtifactStore::ArtifactStore(fs::path dir) : dir_(std::move(dir)) {}

fs::path ArtifactStore::path_for(const std::string& key) const {
    check_key(key);
    return dir_ / key.substr(0, std::min<std::size_t>(2, key.size())) / (key + std::string(kSuffix));
}

void ArtifactStore::store(const std::string& key, std::string_view payload) {
    std::string rec(kMagic);
    rec += sha256_hex(payload);
    rec += '\n';
    rec += std::to_string(payload.size());
    rec += '\n';
    rec += payload;
    write_file_atomic(path_for(key).string(), rec);
}

std::optional<std::string> ArtifactStore::load(const std::string& key) const {
    const auto path = path_for(key);
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) return std::nullopt;
    std::string raw;
    try {
        raw = read_file(path.string());
    } catch (const std::runtime_error&) {
        return std::nullopt;
    }
    return decode_record(raw, key);
}

bool ArtifactStore::contains(const std::string& key) const {
    std::error_code ec;
    return fs::is_regular_file(path_for(key), ec);
}

void ArtifactStore::store_json(const std::string& key, const nlohmann::json& value) {
    store(key, value.dump());
}

std::optional<nlohmann::json> ArtifactStore::load_json(const std::string& key) const {
    auto raw = load(key);
    if (!raw) return std::nullopt;
    try {
        return nlohmann::json::parse(*raw);
    } catch (const nlohmann::json::parse_error& e) {
        throw CorruptArtifact("artifact " + key + ": " + e.what());
    }
}

std::vector<std::string> ArtifactStore::keys() const {
    std::vector<std::string> out;
    std::error_code ec;
    if (!fs::is_directory(dir_, ec)) return out;
    for (const auto& e : fs::recursive_directory_iterator(dir_)) {
        if (!e.is_regular_file() || e.path().extension() != kSuffix) continue;
        out.push_back(e.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> ArtifactStore::verify() const {
    std::vector<std::string> bad;
    for (const auto& k : keys()) {
        try {
            decode_record(read_file(path_for(k).string()), k);
        } catch (const std::exception&) {
            bad.push_back(k);
        }
    }
    return bad;
}

std::size_t ArtifactStore::clear() {
    std::size_t n = 0;
    for (const auto& k : keys()) {
        std::error_code ec;
        if (fs::remove(path_for(k), ec)) ++n;
    }
    return n;
}

}  // namespace storyverb
