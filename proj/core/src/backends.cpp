#include "storyverb/backends.hpp"

#include <fstream>

#include "storyverb/errors.hpp"
#include "storyverb/text.hpp"

namespace storyverb {

namespace {

nlohmann::json load_fixture(const std::filesystem::path& path) {
    try {
        return nlohmann::json::parse(read_file(path.string()));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string(), 0, e.what());
    } catch (const std::runtime_error& e) {
        throw ConfigError("fixture", e.what());
    }
}

// "<video>:<frame>", then "<video>:*", then "*".
const nlohmann::json* lookup_image_entry(const nlohmann::json& table, const ImageRequest& req) {
    for (const std::string& key : {req.video_id + ":" + std::to_string(req.frame_index), req.video_id + ":*",
                                   std::string("*")}) {
        if (auto it = table.find(key); it != table.end()) return &*it;
    }
    return nullptr;
}

}  // namespace

MockCaptionBackend::MockCaptionBackend(nlohmann::json table) : table_(std::move(table)) {}

std::unique_ptr<MockCaptionBackend> MockCaptionBackend::from_file(const std::filesystem::path& path) {
    return std::make_unique<MockCaptionBackend>(load_fixture(path));
}

std::size_t MockCaptionBackend::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

const nlohmann::json* MockCaptionBackend::entry(const ImageRequest& req) const {
    return lookup_image_entry(table_, req);
}

std::string MockCaptionBackend::describe(const ImageRequest& req) {
    {
        std::lock_guard lock(mu_);
        ++calls_;
    }
    const auto* e = entry(req);
    if (!e) throw BackendError("no caption fixture for " + req.video_id + ":" + std::to_string(req.frame_index), false);
    if (e->value("fail", false)) throw BackendError("captioner failure (fixture)", false);
    if (req.prompt == kObjectsPrompt) return e->value("objects", std::string{});
    return e->value("caption", std::string{});
}

MockOcrBackend::MockOcrBackend(nlohmann::json table) : table_(std::move(table)) {}

std::unique_ptr<MockOcrBackend> MockOcrBackend::from_file(const std::filesystem::path& path) {
    return std::make_unique<MockOcrBackend>(load_fixture(path));
}

std::string MockOcrBackend::read_text(const ImageRequest& req) {
    const auto* e = lookup_image_entry(table_, req);
    if (!e) return {};
    if (e->is_string()) return e->get<std::string>();
    if (e->value("fail", false)) throw BackendError("ocr failure (fixture)", false);
    return e->value("text", std::string{});
}

MockKnowledgeBackend::MockKnowledgeBackend(nlohmann::json table) : table_(std::move(table)) {}

std::unique_ptr<MockKnowledgeBackend> MockKnowledgeBackend::from_file(const std::filesystem::path& path) {
    return std::make_unique<MockKnowledgeBackend>(load_fixture(path));
}

std::size_t MockKnowledgeBackend::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

BrandMetadata MockKnowledgeBackend::lookup(const std::string& channel) {
    {
        std::lock_guard lock(mu_);
        ++calls_;
    }
    auto it = table_.find(channel);
    if (it == table_.end()) return {};
    if (it->value("unreachable", false)) throw BackendError("knowledge base unreachable (fixture)", true);
    BrandMetadata m;
    if (it->contains("company")) m.company = (*it)["company"].get<std::string>();
    if (it->contains("product_line")) m.product_line = (*it)["product_line"].get<std::string>();
    if (it->contains("description")) m.description = (*it)["description"].get<std::string>();
    return m;
}

}  // namespace storyverb
