#include <doctest.h>

#include <atomic>
#include <filesystem>

#include "storyverb/dataset.hpp"
#include "storyverb/errors.hpp"
#include "storyverb/pipeline.hpp"

using namespace storyverb;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = STORYVERB_TEST_FIXTURES_DIR;

struct E2e {
    AppConfig cfg = load_app_config(kFixtures / "e2e/config.yaml");
    TaskCatalog catalog = TaskCatalog::load(STORYVERB_TEST_DATA_DIR);
    DatasetManifest corpus = load_dataset(DatasetName::video_ads, kFixtures / "e2e/corpus", catalog);
    BackendSet backends = BackendSet::from_config(cfg);

    VerbalBundle run(const std::string& id) {
        return verbalize_video(corpus.video(id), {corpus.frames_dir(id), corpus.subtitles(id)}, cfg.pipeline, backends);
    }
};

std::vector<std::int64_t> frames_of(const VerbalBundle& b) {
    std::vector<std::int64_t> out;
    for (const auto& c : b.captions) out.push_back(c.frame_index);
    for (const auto& f : b.caption_failures) out.push_back(f.frame_index);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("backend ids from config") {
    E2e e;
    CHECK(e.backends.ids.at("captioner") == "vision");
    CHECK(e.backends.ids.at("flow") == "native");
    auto cfg = e.cfg;
    cfg.stages["captioner"] = "ghost";
    CHECK_THROWS_AS(BackendSet::from_config(cfg), ConfigError);
}

TEST_CASE("fixture keyframes") {
    E2e e;
    auto cola = e.run("ad_cola");
    CHECK(cola.keyframe_method == "flow");
    CHECK(frames_of(cola) == std::vector<std::int64_t>{8, 15, 23});
    CHECK(cola.metadata.company == "FizzCo");
    CHECK(cola.ocr.words() == std::vector<std::string>{"fizz", "cola", "50%", "less", "sugar", "open", "joy"});
    CHECK(cola.transcript->segments.size() == 3);

    auto shoe = e.run("ad_shoe");
    CHECK(frames_of(shoe) == std::vector<std::int64_t>{10});
    CHECK(shoe.metadata.source == MetadataSource::none);

    auto bank = e.run("ad_bank");
    CHECK(bank.keyframe_method == "uniform");
    CHECK(frames_of(bank).size() == 15);
    CHECK(bank.ocr.words() == std::vector<std::string>{"bank", "smart"});

    auto game = e.run("ad_game");
    CHECK(game.captions.empty());
    CHECK(game.ocr.empty());
    CHECK(game.transcript->segments.size() == 2);

    auto charity = e.run("ad_charity");
    CHECK(charity.keyframe_method == "none");
    CHECK(charity.captions.empty());

    auto doc = e.run("long_doc");
    CHECK(doc.keyframe_method == "uniform");
    CHECK(frames_of(doc).size() == 20);
    CHECK(frames_of(doc).back() == 57);
    REQUIRE(doc.caption_failures.size() == 1);
    CHECK(doc.caption_failures[0].frame_index == 30);
    CHECK(doc.ocr.empty());
}

TEST_CASE("verbalize is deterministic") {
    E2e a, b;
    for (const auto& v : a.corpus.items) CHECK(a.run(v.video_id) == b.run(v.video_id));
}

TEST_CASE("verbalize slice tracks backend ids") {
    PipelineConfig cfg;
    auto s = verbalize_slice(cfg, {{"captioner", "a"}});
    CHECK(s != verbalize_slice(cfg, {{"captioner", "b"}}));
    cfg.story_temperature = 1.5;
    CHECK(s == verbalize_slice(cfg, {{"captioner", "a"}}));
}

TEST_CASE("parallel_for") {
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    std::atomic<int> done{0};
    CHECK_THROWS_AS(parallel_for(50, 3,
                                 [&](std::size_t i) {
                                     if (i == 7) throw std::runtime_error("boom");
                                     ++done;
                                 }),
                    std::runtime_error);
    parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

}
