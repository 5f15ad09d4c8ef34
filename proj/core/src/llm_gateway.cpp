#include "storyverb/llm_gateway.hpp"

#include <algorithm>
#include <set>

#include <spdlog/spdlog.h>

#include "storyverb/artifact_store.hpp"
#include "storyverb/digest.hpp"
#include "storyverb/errors.hpp"
#include "storyverb/text.hpp"

namespace storyverb {

// ---- mock backends ----------------------------------------------------------

MockTextBackend::MockTextBackend(nlohmann::json table) : table_(std::move(table)) {}

std::unique_ptr<MockTextBackend> MockTextBackend::from_file(const std::filesystem::path& path) {
    try {
        return std::make_unique<MockTextBackend>(nlohmann::json::parse(read_file(path.string())));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string(), 0, e.what());
    } catch (const std::runtime_error& e) {
        throw ConfigError("fixture", e.what());
    }
}

std::string MockTextBackend::complete(const GenerationRequest& req) {
    if (auto by = table_.find("by_digest"); by != table_.end()) {
        if (auto hit = by->find(sha256_hex(req.prompt)); hit != by->end()) return hit->get<std::string>();
    }
    if (auto rules = table_.find("rules"); rules != table_.end()) {
        for (const auto& rule : *rules) {
            const auto& needles = rule.at("contains");
            const bool all = std::all_of(needles.begin(), needles.end(), [&req](const nlohmann::json& n) {
                return req.prompt.find(n.get<std::string>()) != std::string::npos;
            });
            if (all) return rule.at("text").get<std::string>();
        }
    }
    if (auto def = table_.find("default"); def != table_.end()) return def->get<std::string>();
    throw BackendError("no mock response for prompt " + sha256_hex(req.prompt).substr(0, 12), false);
}

namespace {

// Section bodies of a task prompt.
struct ParsedTaskPrompt {
    std::vector<std::string> options;
    std::string story;
};

ParsedTaskPrompt parse_task_prompt(const std::string& prompt) {
    ParsedTaskPrompt out;
    static const std::string kOptions = "\nOptions:\n";
    static const std::string kStory = "\nStory:\n";
    if (auto pos = prompt.find(kOptions); pos != std::string::npos) {
        std::size_t i = pos + kOptions.size();
        while (i < prompt.size()) {
            auto nl = prompt.find('\n', i);
            std::string_view line(prompt.data() + i, (nl == std::string::npos ? prompt.size() : nl) - i);
            if (trim(line).empty()) break;
            auto dot = line.find(". ");
            out.options.emplace_back(dot == std::string_view::npos ? line : line.substr(dot + 2));
            if (nl == std::string::npos) break;
            i = nl + 1;
        }
    }
    if (auto pos = prompt.find(kStory); pos != std::string::npos) {
        const std::size_t start = pos + kStory.size();
        auto end = prompt.rfind("\n\n");
        if (end == std::string::npos || end < start) end = prompt.size();
        out.story = prompt.substr(start, end - start);
    }
    return out;
}

std::set<std::string> token_set(std::string_view s) {
    auto toks = word_tokens(s);
    return {toks.begin(), toks.end()};
}

}  // namespace

std::string TokenOverlapBackend::complete(const GenerationRequest& req) {
    const auto parsed = parse_task_prompt(req.prompt);
    if (parsed.options.empty()) {
        const auto story = trim(parsed.story);
        const auto stop = story.find_first_of(".!?");
        return std::string(stop == std::string_view::npos ? story : story.substr(0, stop + 1));
    }
    const auto story_tokens = token_set(parsed.story);
    std::size_t best = 0;
    std::size_t best_overlap = 0;
    for (std::size_t i = 0; i < parsed.options.size(); ++i) {
        std::size_t overlap = 0;
        for (const auto& t : token_set(parsed.options[i])) overlap += story_tokens.count(t);
        if (overlap > best_overlap) {
            best_overlap = overlap;
            best = i;
        }
    }
    return parsed.options[best];
}

// ---- gateway ----------------------------------------------------------------

std::string response_cache_key(const GenerationRequest& req) {
    std::string buf = "storyverb-llm-v1\n";
    buf += req.backend_id + "\n";
    buf += sha256_hex(req.prompt) + "\n";
    buf += format_real(req.temperature) + "\n";
    buf += std::to_string(req.max_output_chars) + "\n";
    return sha256_hex(buf);
}

std::map<std::int64_t, std::size_t> latency_histogram(const std::vector<std::int64_t>& values,
                                                      std::int64_t width) {
    std::map<std::int64_t, std::size_t> hist;
    if (width <= 0) return hist;
    for (auto v : values) {
        std::int64_t lo = (v >= 0 ? v / width : (v - width + 1) / width) * width;
        ++hist[lo];
    }
    return hist;
}

struct LlmGateway::Entry {
    Entry(BackendDescriptor d, std::unique_ptr<TextBackend> b, Clock& clock)
        : desc(std::move(d)), backend(std::move(b)), limiter(desc.rate_limit_rpm, clock) {}
    BackendDescriptor desc;
    std::unique_ptr<TextBackend> backend;
    RateLimiter limiter;
};

LlmGateway::LlmGateway(Clock& clock, RetryPolicy retry) : clock_(clock), retry_(retry) {}
LlmGateway::~LlmGateway() = default;

void LlmGateway::register_backend(const BackendDescriptor& desc, std::unique_ptr<TextBackend> backend) {
    std::lock_guard lock(mu_);
    if (backends_.count(desc.id)) throw ConfigError("backends." + desc.id, "backend id already registered");
    backends_.emplace(desc.id, std::make_unique<Entry>(desc, std::move(backend), clock_));
}

void LlmGateway::register_backend(const BackendDescriptor& desc) {
    register_backend(desc, make_text_backend(desc));
}

bool LlmGateway::has_backend(const std::string& id) const {
    std::lock_guard lock(mu_);
    return backends_.count(id) > 0;
}

void LlmGateway::attach_store(ArtifactStore* store) {
    std::lock_guard lock(mu_);
    store_ = store;
}

LlmGateway::Entry& LlmGateway::entry(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = backends_.find(id);
    if (it == backends_.end()) throw ConfigError("backend", "unknown backend '" + id + "'");
    return *it->second;
}

GenerationResponse LlmGateway::generate(const GenerationRequest& req) {
    if (req.prompt.empty()) throw std::invalid_argument("generation prompt must not be empty");
    Entry& e = entry(req.backend_id);
    const auto start = clock_.now();
    const auto elapsed = [&] { return (clock_.now() - start).count(); };

    std::string key;
    ArtifactStore* store = nullptr;
    if (e.desc.cache) {
        key = response_cache_key(req);
        std::optional<std::string> hit;
        {
            std::lock_guard lock(mu_);
            store = store_;
            if (auto it = memory_cache_.find(key); it != memory_cache_.end()) hit = it->second;
        }
        if (!hit && store) {
            try {
                if (auto rec = store->load_json(key)) hit = rec->at("text").get<std::string>();
            } catch (const CorruptArtifact& err) {
                spdlog::warn("ignoring damaged cache record {}: {}", key, err.what());
            }
        }
        if (hit) {
            std::lock_guard lock(mu_);
            memory_cache_[key] = *hit;
            ++stats_.cache_hits;
            stats_.latency_ms.push_back(elapsed());
            return {*hit, req.backend_id, elapsed(), true};
        }
    }

    const auto slot = e.limiter.acquire();
    {
        std::lock_guard lock(mu_);
        stats_.dispatch_ms.push_back(slot.count());
    }

    auto backoff = retry_.initial_backoff;
    std::string text;
    for (int attempt = 1;; ++attempt) {
        try {
            {
                std::lock_guard lock(mu_);
                ++stats_.backend_calls;
            }
            text = e.backend->complete(req);
            break;
        } catch (const BackendError& err) {
            if (!err.transient() || attempt >= e.desc.max_attempts) {
                throw BackendError(req.backend_id + ": giving up after " + std::to_string(attempt) +
                                       " attempt(s): " + err.what(),
                                   err.transient());
            }
            spdlog::debug("{}: attempt {} failed ({}), retrying", req.backend_id, attempt, err.what());
            {
                std::lock_guard lock(mu_);
                ++stats_.retries;
            }
            clock_.sleep_for(backoff);
            backoff = std::min(backoff * 2, retry_.max_backoff);
        }
    }

    if (e.desc.cache) {
        if (store) store->store_json(key, {{"backend_id", req.backend_id}, {"text", text}});
        std::lock_guard lock(mu_);
        memory_cache_[key] = text;
    }
    const auto latency = elapsed();
    {
        std::lock_guard lock(mu_);
        stats_.latency_ms.push_back(latency);
    }
    return {std::move(text), req.backend_id, latency, false};
}

GatewayStats LlmGateway::stats() const {
    std::lock_guard lock(mu_);
    return stats_;
}

}  // namespace storyverb
