#include <doctest.h>
#include <set>

#include <algorithm>
#include <filesystem>
#include <thread>

#include "storyverb/artifact_store.hpp"
#include "storyverb/digest.hpp"
#include "storyverb/errors.hpp"
#include "storyverb/llm_gateway.hpp"

using namespace storyverb;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Flaky : public TextBackend {
public:
    Flaky(int failures, bool transient) : failures_(failures), transient_(transient) {}
    std::string complete(const GenerationRequest&) override {
        ++calls;
        if (calls <= failures_) throw BackendError("overloaded", transient_);
        return "recovered";
    }
    int calls = 0;

private:
    int failures_;
    bool transient_;
};

class Echo : public TextBackend {
public:
    std::string complete(const GenerationRequest& r) override { return "echo:" + r.prompt; }
};

BackendDescriptor desc(std::string id, double rpm = 0, int attempts = 5, bool cache = true) {
    BackendDescriptor d;
    d.id = std::move(id);
    d.rate_limit_rpm = rpm;
    d.max_attempts = attempts;
    d.cache = cache;
    return d;
}

GenerationRequest req(std::string prompt, std::string backend = "mock") {
    GenerationRequest r;
    r.prompt = std::move(prompt);
    r.backend_id = std::move(backend);
    return r;
}

std::string option_prompt(const std::vector<std::string>& options, const std::string& story) {
    std::string p = "Pick one.\n\nOptions:\n";
    for (std::size_t i = 0; i < options.size(); ++i) p += std::to_string(i + 1) + ". " + options[i] + "\n";
    return p + "\nStory:\n" + story + "\n\nReply with one option.\nAnswer:";
}

}  // namespace

TEST_SUITE("llm-gateway") {

TEST_CASE("mock lookup by digest, rule and default") {
    const std::string p = "Tell me a story";
    MockTextBackend m(json{{"by_digest", {{sha256_hex(p), "a story"}}},
                           {"rules", json::array({{{"contains", {"cola", "beach"}}, {"text", "rule hit"}}})},
                           {"default", "fallback"}});
    CHECK(m.complete(req(p)) == "a story");
    CHECK(m.complete(req("cola on the beach")) == "rule hit");
    CHECK(m.complete(req("cola only")) == "fallback");
    MockTextBackend strict(json{{"rules", json::array()}});
    CHECK_THROWS_AS(strict.complete(req("x")), BackendError);
}

TEST_CASE("register and generate") {
    ManualClock clock;
    LlmGateway gw(clock);
    gw.register_backend(desc("mock"), std::make_unique<MockTextBackend>(json{{"default", "a story"}}));
    CHECK(gw.has_backend("mock"));
    auto r = gw.generate(req("P"));
    CHECK(r.text == "a story");
    CHECK(r.backend_id == "mock");
    CHECK_FALSE(r.cached);
    CHECK_THROWS_AS(gw.register_backend(desc("mock"), std::make_unique<Echo>()), ConfigError);
    CHECK_THROWS_AS(gw.generate(req("P", "ghost")), ConfigError);
    CHECK_THROWS_AS(gw.generate(req("")), std::invalid_argument);
}

TEST_CASE("cache hit on identical request, miss on any change") {
    ManualClock clock;
    LlmGateway gw(clock);
    auto echo = std::make_unique<Echo>();
    gw.register_backend(desc("mock"), std::move(echo));
    auto first = gw.generate(req("P"));
    auto second = gw.generate(req("P"));
    CHECK(second.cached);
    CHECK(second.text == first.text);
    CHECK(gw.stats().backend_calls == 1);

    auto t = req("P");
    t.temperature = 0.3;
    CHECK_FALSE(gw.generate(t).cached);
    auto m = req("P");
    m.max_output_chars = 10;
    CHECK_FALSE(gw.generate(m).cached);
    CHECK_FALSE(gw.generate(req("Q")).cached);
    CHECK(gw.stats().cache_hits == 1);

    std::set<std::string> keys;
    for (auto r : {req("P"), t, m, req("Q"), req("P", "other")}) keys.insert(response_cache_key(r));
    CHECK(keys.size() == 5);
}

TEST_CASE("disabled cache always calls the backend") {
    ManualClock clock;
    LlmGateway gw(clock);
    gw.register_backend(desc("mock", 0, 5, false), std::make_unique<Echo>());
    gw.generate(req("P"));
    CHECK_FALSE(gw.generate(req("P")).cached);
    CHECK(gw.stats().backend_calls == 2);
}

TEST_CASE("retry with exponential backoff") {
    ManualClock clock;
    LlmGateway gw(clock);
    auto flaky = std::make_unique<Flaky>(3, true);
    auto* raw = flaky.get();
    gw.register_backend(desc("mock"), std::move(flaky));
    auto r = gw.generate(req("P"));
    CHECK(r.text == "recovered");
    CHECK(raw->calls == 4);
    CHECK(gw.stats().retries == 3);
    CHECK(clock.now() == Clock::duration(200 + 400 + 800));
}

TEST_CASE("retries are exhausted and permanent errors are not retried") {
    ManualClock clock;
    LlmGateway gw(clock);
    auto flaky = std::make_unique<Flaky>(10, true);
    auto* raw = flaky.get();
    gw.register_backend(desc("mock", 0, 5), std::move(flaky));
    CHECK_THROWS_AS(gw.generate(req("P")), BackendError);
    CHECK(raw->calls == 5);

    auto hard = std::make_unique<Flaky>(1, false);
    auto* hard_raw = hard.get();
    gw.register_backend(desc("hard"), std::move(hard));
    CHECK_THROWS_AS(gw.generate(req("P", "hard")), BackendError);
    CHECK(hard_raw->calls == 1);
}

TEST_CASE("backoff is capped") {
    ManualClock clock;
    LlmGateway gw(clock, RetryPolicy{Clock::duration(200), Clock::duration(1000)});
    gw.register_backend(desc("mock", 0, 6), std::make_unique<Flaky>(5, true));
    gw.generate(req("P"));
    CHECK(clock.now() == Clock::duration(200 + 400 + 800 + 1000 + 1000));
}

TEST_CASE("rate limit 60 per minute over 120 requests") {
    ManualClock clock;
    LlmGateway gw(clock);
    gw.register_backend(desc("mock", 60), std::make_unique<Echo>());
    for (int i = 0; i < 120; ++i) gw.generate(req("prompt " + std::to_string(i)));
    auto s = gw.stats();
    REQUIRE(s.dispatch_ms.size() == 120);
    for (std::size_t i = 1; i < s.dispatch_ms.size(); ++i) CHECK(s.dispatch_ms[i] - s.dispatch_ms[i - 1] >= 1000);
    CHECK(s.dispatch_ms.back() == 119'000);
    auto hist = latency_histogram(s.dispatch_ms, 60'000);
    CHECK(hist.size() == 2);
    for (auto& [bucket, count] : hist) CHECK(count == 60);
}

TEST_CASE("rate limit holds under concurrent callers") {
    ManualClock clock;
    LlmGateway gw(clock);
    gw.register_backend(desc("mock", 60), std::make_unique<Echo>());
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&, t] {
            for (int i = 0; i < 30; ++i) gw.generate(req("t" + std::to_string(t) + "/" + std::to_string(i)));
        });
    for (auto& th : threads) th.join();
    auto d = gw.stats().dispatch_ms;
    REQUIRE(d.size() == 120);
    std::sort(d.begin(), d.end());
    for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i] - d[i - 1] >= 1000);
    for (auto& [bucket, count] : latency_histogram(d, 60'000)) CHECK(count <= 60);
}

TEST_CASE("latency histogram buckets") {
    auto h = latency_histogram({0, 5, 10, 19, 20}, 10);
    CHECK(h == std::map<std::int64_t, std::size_t>{{0, 2}, {10, 2}, {20, 1}});
}

TEST_CASE("disk cache survives a new gateway") {
    const fs::path dir = fs::temp_directory_path() / "storyverb_gw_cache";
    fs::remove_all(dir);
    ArtifactStore store(dir);
    ManualClock clock;
    {
        LlmGateway gw(clock);
        gw.attach_store(&store);
        gw.register_backend(desc("mock"), std::make_unique<Echo>());
        gw.generate(req("P"));
    }
    LlmGateway again(clock);
    again.attach_store(&store);
    auto flaky = std::make_unique<Flaky>(100, false);
    auto* raw = flaky.get();
    again.register_backend(desc("mock"), std::move(flaky));
    auto r = again.generate(req("P"));
    CHECK(r.cached);
    CHECK(r.text == "echo:P");
    CHECK(raw->calls == 0);
    fs::remove_all(dir);
}

TEST_CASE("token overlap backend") {
    TokenOverlapBackend b;
    auto r = req(option_prompt({"dogs barking loudly", "a red sports car racing", "green tea"},
                               "The red car was racing past a sports arena."));
    CHECK(b.complete(r) == "a red sports car racing");
    // tie goes to the earliest option
    CHECK(b.complete(req(option_prompt({"alpha", "beta"}, "Alpha beta."))) == "alpha");
    CHECK(b.complete(req("Write it.\n\nStory:\nFirst sentence here. Second one.\n\nAnswer:")) ==
          "First sentence here.");
}

}
