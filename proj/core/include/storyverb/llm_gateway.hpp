#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "storyverb/clock.hpp"
#include "storyverb/config.hpp"

namespace storyverb {

class ArtifactStore;

struct GenerationRequest {
    std::string prompt;
    double temperature = 0.75;
    int max_output_chars = 4000;
    std::string backend_id;
};

struct GenerationResponse {
    std::string text;
    std::string backend_id;
    std::int64_t latency_ms = 0;
    bool cached = false;
};

class TextBackend {
public:
    virtual ~TextBackend() = default;
    // Throws BackendError; transient() marks retryable failures.
    virtual std::string complete(const GenerationRequest& req) = 0;
};

// Lookup-table backend. Fixture layout:
//   { "by_digest": {"<sha256(prompt)>": "text"},
//     "rules": [{"contains": ["a", "b"], "text": "..."}],
//     "default": "text" }
// Digest match first, then the first rule whose substrings all occur in the
// prompt, then the default. No match is a permanent backend error.
// Temperature is ignored.
class MockTextBackend : public TextBackend {
public:
    explicit MockTextBackend(nlohmann::json table);
    static std::unique_ptr<MockTextBackend> from_file(const std::filesystem::path& path);

    std::string complete(const GenerationRequest& req) override;

private:
    nlohmann::json table_;
};

// Answers option prompts with the option sharing the most unique tokens with
// the story (ties: earliest option); answers option-free prompts with the
// story's first sentence. Prompts must use the task template layout.
class TokenOverlapBackend : public TextBackend {
public:
    std::string complete(const GenerationRequest& req) override;
};

std::unique_ptr<TextBackend> make_text_backend(const BackendDescriptor& desc);

// Cache key over (backend_id, prompt digest, temperature, max_output_chars).
std::string response_cache_key(const GenerationRequest& req);

struct GatewayStats {
    std::vector<std::int64_t> dispatch_ms;   // backend call start times
    std::vector<std::int64_t> latency_ms;    // request to response, incl. pacing
    std::size_t backend_calls = 0;
    std::size_t cache_hits = 0;
    std::size_t retries = 0;
};

// Counts per [lo, lo+width) bucket.
std::map<std::int64_t, std::size_t> latency_histogram(const std::vector<std::int64_t>& values,
                                                      std::int64_t width);

struct RetryPolicy {
    Clock::duration initial_backoff{200};
    Clock::duration max_backoff{10'000};
};

// Uniform entry point for text generation backends. Thread-safe.
class LlmGateway {
public:
    explicit LlmGateway(Clock& clock, RetryPolicy retry = {});
    ~LlmGateway();
    LlmGateway(const LlmGateway&) = delete;
    LlmGateway& operator=(const LlmGateway&) = delete;

    // Throws ConfigError on a duplicate id.
    void register_backend(const BackendDescriptor& desc, std::unique_ptr<TextBackend> backend);
    void register_backend(const BackendDescriptor& desc);   // via make_text_backend
    bool has_backend(const std::string& id) const;

    // Responses of cache-enabled backends are kept in memory and, when a store
    // is attached, on disk.
    void attach_store(ArtifactStore* store);

    GenerationResponse generate(const GenerationRequest& req);

    GatewayStats stats() const;

private:
    struct Entry;
    Entry& entry(const std::string& id);

    Clock& clock_;
    RetryPolicy retry_;
    ArtifactStore* store_ = nullptr;
    mutable std::mutex mu_;
    std::map<std::string, std::unique_ptr<Entry>> backends_;
    std::map<std::string, std::string> memory_cache_;
    GatewayStats stats_;
};

}  // namespace storyverb
