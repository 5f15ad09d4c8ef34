#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "storyverb/config.hpp"
#include "storyverb/flow.hpp"
#include "storyverb/frame.hpp"
#include "storyverb/signals.hpp"

namespace storyverb {

// A single image question sent to a vision backend.
struct ImageRequest {
    std::string video_id;
    std::int64_t frame_index = 0;
    const Frame* frame = nullptr;
    std::string prompt;
};

class CaptionBackend {
public:
    virtual ~CaptionBackend() = default;
    // Free-text answer to req.prompt. Throws BackendError.
    virtual std::string describe(const ImageRequest& req) = 0;
};

class OcrBackend {
public:
    virtual ~OcrBackend() = default;
    // Raw text found in the frame (may be empty). Throws BackendError.
    virtual std::string read_text(const ImageRequest& req) = 0;
};

class KnowledgeBackend {
public:
    virtual ~KnowledgeBackend() = default;
    // Whatever the knowledge base resolves for a channel name. Throws BackendError.
    virtual BrandMetadata lookup(const std::string& channel) = 0;
};

// Fixture-driven captioner. Table layout:
//   { "<video_id>:<frame_index>": {"caption": "...", "objects": "...", "fail": false},
//     "<video_id>:*": {...}, "*": {...} }
// Most specific key wins. A missing entry is a (permanent) backend error.
class MockCaptionBackend : public CaptionBackend {
public:
    explicit MockCaptionBackend(nlohmann::json table);
    static std::unique_ptr<MockCaptionBackend> from_file(const std::filesystem::path& path);

    std::string describe(const ImageRequest& req) override;
    std::size_t calls() const;

private:
    const nlohmann::json* entry(const ImageRequest& req) const;

    nlohmann::json table_;
    mutable std::mutex mu_;
    std::size_t calls_ = 0;
};

// Same keying as MockCaptionBackend; values are {"text": "..."} or {"fail": true}.
// Missing entries read as "no text".
class MockOcrBackend : public OcrBackend {
public:
    explicit MockOcrBackend(nlohmann::json table);
    static std::unique_ptr<MockOcrBackend> from_file(const std::filesystem::path& path);

    std::string read_text(const ImageRequest& req) override;

private:
    nlohmann::json table_;
};

// { "<channel>": {"company": ..., "product_line": ..., "description": ...}
//   | {"unreachable": true} }
class MockKnowledgeBackend : public KnowledgeBackend {
public:
    explicit MockKnowledgeBackend(nlohmann::json table);
    static std::unique_ptr<MockKnowledgeBackend> from_file(const std::filesystem::path& path);

    BrandMetadata lookup(const std::string& channel) override;
    std::size_t calls() const;

private:
    nlohmann::json table_;
    mutable std::mutex mu_;
    std::size_t calls_ = 0;
};

// POSTs a JSON body to the descriptor's endpoint and returns the JSON reply.
// Connection failures, 429 and 5xx are transient; other non-2xx are not.
nlohmann::json post_json(const BackendDescriptor& desc, const nlohmann::json& body);

std::unique_ptr<CaptionBackend> make_caption_backend(const BackendDescriptor& desc);
std::unique_ptr<OcrBackend> make_ocr_backend(const BackendDescriptor& desc);
std::unique_ptr<KnowledgeBackend> make_knowledge_backend(const BackendDescriptor& desc);
// kind "native" (or an empty descriptor) gives BlockMatchingFlow; "http"
// sends {prev, next} base64 images and reads {score}.
std::unique_ptr<FlowEstimator> make_flow_estimator(const BackendDescriptor& desc);

}  // namespace storyverb
