// The only translation unit that includes cpp-httplib.
#include <cstdlib>
#include <memory>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "storyverb/backends.hpp"
#include "storyverb/clock.hpp"
#include "storyverb/digest.hpp"
#include "storyverb/errors.hpp"
#include "storyverb/llm_gateway.hpp"

namespace storyverb {

namespace {

struct Endpoint {
    std::string base;   // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint", "missing scheme in '" + url + "'");
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

std::string image_base64(const Frame* frame) {
    if (!frame) throw BackendError("image request without a frame", false);
    return base64_encode(encode_netpbm(*frame));
}

// Paces calls of one remote backend.
class Paced {
public:
    explicit Paced(const BackendDescriptor& desc) : desc_(desc), limiter_(desc.rate_limit_rpm, clock_) {}
    nlohmann::json call(const nlohmann::json& body) {
        limiter_.acquire();
        return post_json(desc_, body);
    }

private:
    BackendDescriptor desc_;
    SystemClock clock_;
    RateLimiter limiter_;
};

class HttpCaptionBackend : public CaptionBackend {
public:
    explicit HttpCaptionBackend(const BackendDescriptor& desc) : remote_(desc) {}
    std::string describe(const ImageRequest& req) override {
        auto reply = remote_.call({{"image", image_base64(req.frame)}, {"prompt", req.prompt}});
        return reply.value("text", std::string{});
    }

private:
    Paced remote_;
};

class HttpOcrBackend : public OcrBackend {
public:
    explicit HttpOcrBackend(const BackendDescriptor& desc) : remote_(desc) {}
    std::string read_text(const ImageRequest& req) override {
        auto reply = remote_.call({{"image", image_base64(req.frame)}});
        return reply.value("text", std::string{});
    }

private:
    Paced remote_;
};

class HttpKnowledgeBackend : public KnowledgeBackend {
public:
    explicit HttpKnowledgeBackend(const BackendDescriptor& desc) : remote_(desc) {}
    BrandMetadata lookup(const std::string& channel) override {
        auto reply = remote_.call({{"channel", channel}});
        BrandMetadata m;
        auto field = [&reply](const char* name) -> std::optional<std::string> {
            auto it = reply.find(name);
            if (it == reply.end() || !it->is_string() || it->get<std::string>().empty()) return std::nullopt;
            return it->get<std::string>();
        };
        m.company = field("company");
        m.product_line = field("product_line");
        m.description = field("description");
        return m;
    }

private:
    Paced remote_;
};

class HttpTextBackend : public TextBackend {
public:
    explicit HttpTextBackend(const BackendDescriptor& desc) : desc_(desc) {}
    std::string complete(const GenerationRequest& req) override {
        auto reply = post_json(desc_, {{"prompt", req.prompt},
                                       {"temperature", req.temperature},
                                       {"max_output_chars", req.max_output_chars}});
        auto it = reply.find("text");
        if (it == reply.end() || !it->is_string()) throw BackendError(desc_.id + ": reply lacks text", false);
        return it->get<std::string>();
    }

private:
    BackendDescriptor desc_;
};

class HttpFlowEstimator : public FlowEstimator {
public:
    explicit HttpFlowEstimator(const BackendDescriptor& desc) : desc_(desc) {}
    double estimate(const Frame& prev, const Frame& next) const override {
        if (prev.width != next.width || prev.height != next.height)
            throw std::invalid_argument("frame dimensions differ");
        auto reply = post_json(desc_, {{"prev", image_base64(&prev)}, {"next", image_base64(&next)}});
        auto it = reply.find("score");
        if (it == reply.end() || !it->is_number()) throw BackendError(desc_.id + ": reply lacks score", false);
        return it->get<double>();
    }

private:
    BackendDescriptor desc_;
};

}  // namespace

nlohmann::json post_json(const BackendDescriptor& desc, const nlohmann::json& body) {
    const Endpoint ep = split_endpoint(desc.endpoint);
    httplib::Client client(ep.base);
    const auto secs = static_cast<time_t>(desc.timeout_s);
    const auto usecs = static_cast<time_t>((desc.timeout_s - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (const char* key = std::getenv(desc.auth_env_name().c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto res = client.Post(ep.path, headers, body.dump(), "application/json");
    if (!res) {
        throw BackendError(desc.id + ": " + httplib::to_string(res.error()), true);
    }
    if (res->status == 429 || res->status >= 500) {
        throw BackendError(desc.id + ": HTTP " + std::to_string(res->status), true);
    }
    if (res->status < 200 || res->status >= 300) {
        throw BackendError(desc.id + ": HTTP " + std::to_string(res->status), false);
    }
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw BackendError(desc.id + ": malformed reply: " + e.what(), false);
    }
}

std::unique_ptr<CaptionBackend> make_caption_backend(const BackendDescriptor& desc) {
    if (desc.kind == "mock") return MockCaptionBackend::from_file(desc.fixture);
    if (desc.kind == "http") return std::make_unique<HttpCaptionBackend>(desc);
    throw ConfigError("backends." + desc.id + ".kind", "'" + desc.kind + "' cannot caption frames");
}

std::unique_ptr<OcrBackend> make_ocr_backend(const BackendDescriptor& desc) {
    if (desc.kind == "mock") return MockOcrBackend::from_file(desc.fixture);
    if (desc.kind == "http") return std::make_unique<HttpOcrBackend>(desc);
    throw ConfigError("backends." + desc.id + ".kind", "'" + desc.kind + "' cannot read text");
}

std::unique_ptr<KnowledgeBackend> make_knowledge_backend(const BackendDescriptor& desc) {
    if (desc.kind == "mock") return MockKnowledgeBackend::from_file(desc.fixture);
    if (desc.kind == "http") return std::make_unique<HttpKnowledgeBackend>(desc);
    throw ConfigError("backends." + desc.id + ".kind", "'" + desc.kind + "' cannot resolve brands");
}

std::unique_ptr<FlowEstimator> make_flow_estimator(const BackendDescriptor& desc) {
    if (desc.kind == "native" || desc.id.empty()) return std::make_unique<BlockMatchingFlow>();
    if (desc.kind == "http") return std::make_unique<HttpFlowEstimator>(desc);
    throw ConfigError("backends." + desc.id + ".kind", "'" + desc.kind + "' cannot estimate flow");
}

std::unique_ptr<TextBackend> make_text_backend(const BackendDescriptor& desc) {
    if (desc.kind == "mock") return MockTextBackend::from_file(desc.fixture);
    if (desc.kind == "overlap") return std::make_unique<TokenOverlapBackend>();
    if (desc.kind == "http") return std::make_unique<HttpTextBackend>(desc);
    throw ConfigError("backends." + desc.id + ".kind", "'" + desc.kind + "' cannot generate text");
}

}  // namespace storyverb
