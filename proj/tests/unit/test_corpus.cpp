#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "storyverb/annotations.hpp"
#include "storyverb/artifact_store.hpp"
#include "storyverb/dataset.hpp"
#include "storyverb/errors.hpp"
#include "storyverb/text.hpp"

using namespace storyverb;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = STORYVERB_TEST_FIXTURES_DIR;

const TaskCatalog& catalog() {
    static const auto c = TaskCatalog::load(STORYVERB_TEST_DATA_DIR);
    return c;
}

const QuestionStrategyMap& qmap() {
    static const auto q = QuestionStrategyMap::load(std::string(STORYVERB_TEST_DATA_DIR) + "/persuasion_questions.json");
    return q;
}

AnnotationSheet sheet(std::string annotator, std::string video, std::initializer_list<int> yes) {
    AnnotationSheet s;
    s.annotator_id = std::move(annotator);
    s.video_id = std::move(video);
    for (int q : yes) s.answers[static_cast<std::size_t>(q - 1)] = true;
    return s;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("question map") {
    REQUIRE(qmap().questions().size() == 15);
    CHECK(qmap().vocabulary().size() == 12);
    CHECK(qmap().questions()[0].strategies == std::vector<std::string>{"Authority"});
    CHECK(qmap().questions()[9].strategies == std::vector<std::string>{"Foot-in-the-Door", "Reciprocity"});
    CHECK_THROWS_AS(QuestionStrategyMap({{"q1", "?", {"Authority"}}}, qmap().vocabulary()), ParseError);
}

TEST_CASE("worked examples") {
    auto none = aggregate_annotations(std::vector{sheet("a", "v", {}), sheet("b", "v", {})}, qmap());
    REQUIRE(none.retained.size() == 1);
    CHECK(none.retained[0].strategies == std::set<std::string>{"Unclear"});
    CHECK(none.retained[0].agreement == 1.0);

    auto expert = aggregate_annotations(std::vector{sheet("a", "v", {1}), sheet("b", "v", {1})}, qmap());
    REQUIRE(expert.retained.size() == 1);
    CHECK(expert.retained[0].strategies == std::set<std::string>{"Authority"});
    CHECK(expert.retained[0].agreement == 1.0);
    CHECK(expert.retained[0].n_annotators == 2);

    auto split = aggregate_annotations(std::vector{sheet("a", "v", {1, 2, 3, 4, 5, 6, 7}), sheet("b", "v", {})}, qmap());
    CHECK(split.retained.empty());
    CHECK(split.dropped == std::vector<std::string>{"v"});
    std::vector<AnnotationSheet> s{sheet("a", "v", {1, 2, 3, 4, 5, 6, 7}), sheet("b", "v", {})};
    std::vector<const AnnotationSheet*> ptrs{&s[0], &s[1]};
    CHECK(sheet_agreement(ptrs) == doctest::Approx(8.0 / 15.0).epsilon(1e-15));
}

TEST_CASE("affirmation rules") {
    std::vector<AnnotationSheet> s{sheet("a", "v", {1, 10}), sheet("b", "v", {1}), sheet("c", "v", {12})};
    auto maj = aggregate_annotations(s, qmap(), 0.0, AffirmationRule::majority);
    CHECK(maj.retained[0].strategies == std::set<std::string>{"Authority"});
    auto any = aggregate_annotations(s, qmap(), 0.0, AffirmationRule::any);
    CHECK(any.retained[0].strategies ==
          std::set<std::string>{"Authority", "Foot-in-the-Door", "Reciprocity", "Social Impact"});
    auto all = aggregate_annotations(s, qmap(), 0.0, AffirmationRule::unanimous);
    CHECK(all.retained[0].strategies == std::set<std::string>{"Unclear"});
    CHECK(affirmation_rule_from_string("any") == AffirmationRule::any);
    CHECK_THROWS(affirmation_rule_from_string("most"));
}

TEST_CASE("aggregation rejects bad sheet sets") {
    CHECK_THROWS_AS(aggregate_annotations(std::vector{sheet("a", "v", {})}, qmap()), DatasetError);
    CHECK_THROWS_AS(aggregate_annotations(std::vector{sheet("a", "v", {}), sheet("a", "v", {2})}, qmap()), DatasetError);
}

TEST_CASE("annotation csv") {
    auto sheets = parse_annotation_csv(read_file((kFixtures / "annotations.csv").string()));
    CHECK(sheets.size() == 9);
    CHECK(sheets[0].answers[0]);
    CHECK_FALSE(sheets[0].answers[1]);
    auto tabbed = parse_annotation_csv("x\tv\ty\tn\t1\t0\tYES\tno\tno\tno\tno\tno\tno\tno\tno\tno\tno\n");
    REQUIRE(tabbed.size() == 1);
    CHECK(tabbed[0].answers[0]);
    CHECK_FALSE(tabbed[0].answers[1]);
    CHECK(tabbed[0].answers[2]);
    CHECK(tabbed[0].answers[4]);
    try {
        parse_annotation_csv("a,v,yes\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
    }
    CHECK_THROWS_AS(parse_annotation_csv("a,v,yes,no,no,no,no,no,no,no,no,no,no,no,no,no,maybe\n"), ParseError);

    auto r = aggregate_annotations(sheets, qmap());
    REQUIRE(r.retained.size() == 3);
    CHECK(r.dropped == std::vector<std::string>{"pv_split"});
    CHECK(r.retained[2].video_id == "pv_trio");
    CHECK(r.retained[2].strategies == std::set<std::string>{"Anthropomorphism", "Authority"});
    CHECK(r.retained[2].agreement == doctest::Approx(41.0 / 45.0).epsilon(1e-15));
}

TEST_CASE("label set json") {
    StrategyLabelSet s{"v", {"Authority", "Scarcity"}, 0.75, 3};
    nlohmann::json j = s;
    CHECK(j.get<StrategyLabelSet>() == s);
}

TEST_CASE("video_story mini corpus") {
    auto m = load_dataset(DatasetName::video_story, kFixtures / "video_story", catalog());
    CHECK(m.items.size() == 4);
    CHECK(m.stories.size() == 4);
    CHECK(m.frames_dir("vs_birthday"));
    CHECK_FALSE(m.frames_dir("vs_repair"));
    CHECK_FALSE(m.subtitles("vs_repair"));
    CHECK(m.video("vs_parade").duration_s == 48);
    CHECK_THROWS_AS(m.video("nope"), DatasetError);
    auto st = corpus_stats(m);
    CHECK(st.items == 4);
    CHECK(st.with_media == 1);
    CHECK(st.mean_duration_s == 45.0);
    CHECK(st.mean_story_words == 17.5);
}

TEST_CASE("stats arithmetic") {
    DatasetManifest m;
    CHECK(corpus_stats(m).items == 0);
    CHECK(corpus_stats(m).mean_duration_s == 0.0);
    VideoAsset a, b;
    a.duration_s = 30;
    b.duration_s = 36;
    m.items = {a, b};
    CHECK(corpus_stats(m).mean_duration_s == 33.0);
}

TEST_CASE("ads corpus") {
    auto m = load_dataset(DatasetName::video_ads, kFixtures / "e2e/corpus", catalog());
    CHECK(m.items.size() == 6);
    const auto& cola = m.ads.at("ad_cola");
    CHECK(cola.actions.size() == 5);
    CHECK(cola.reasons.size() == 5);
    CHECK(cola.majority_emotion() == "cheerful");
    CHECK(m.ads.at("ad_charity").majority_emotion() == "empathetic");
    CHECK(m.subtitles("ad_game")->extension() == ".json");
    auto st = corpus_stats(m);
    CHECK(st.with_media == 5);
    CHECK(st.label_histogram.at("soda") == 1);
    CHECK(st.label_histogram.size() == 6);
}

TEST_CASE("persuasion corpus histogram") {
    auto m = load_dataset(DatasetName::persuasion, kFixtures / "persuasion", catalog());
    auto st = corpus_stats(m);
    CHECK(st.items == 5);
    CHECK(st.mean_duration_s == 30.0);
    CHECK(st.label_histogram == std::map<std::string, std::size_t>{{"Authority", 2},
                                                                   {"Concreteness", 1},
                                                                   {"Foot-in-the-Door", 1},
                                                                   {"Reciprocity", 1},
                                                                   {"Scarcity", 1},
                                                                   {"Social Proof", 2},
                                                                   {"Unclear", 1}});
}

TEST_CASE("malformed corpora are rejected") {
    const std::vector<std::pair<std::string, DatasetName>> cases{
        {"four_reasons", DatasetName::video_ads},  {"six_actions", DatasetName::video_ads},
        {"bad_topic", DatasetName::video_ads},     {"missing_labels", DatasetName::video_ads},
        {"bad_strategy", DatasetName::persuasion}, {"one_annotator", DatasetName::persuasion},
        {"bad_json", DatasetName::video_story},    {"missing_story", DatasetName::video_story},
        {"duplicate_id", DatasetName::video_story}};
    for (const auto& [dir, name] : cases) {
        CAPTURE(dir);
        CHECK_THROWS_AS(load_dataset(name, kFixtures / "malformed" / dir, catalog()), DatasetError);
    }
    try {
        load_dataset(DatasetName::video_ads, kFixtures / "malformed/bad_topic", catalog());
    } catch (const DatasetError& e) {
        CHECK(std::string(e.what()).find("spaceships") != std::string::npos);
    }
    CHECK_THROWS_AS(load_dataset(DatasetName::video_story, kFixtures / "nowhere", catalog()), DatasetError);
}

TEST_CASE("artifact store round trip and integrity") {
    TempDir tmp("storyverb_store_test");
    ArtifactStore store(tmp.path);
    VerbalBundle b;
    b.video_id = "v";
    b.title = "T";
    b.captions.push_back({1, 1.0, "a cat", {"cat"}});
    store.store_json("bundle_v", b);
    CHECK(store.load_json("bundle_v")->get<VerbalBundle>() == b);
    CHECK_FALSE(store.load("missing"));
    CHECK(store.contains("bundle_v"));

    store.store("raw", std::string("bytes\0with nul", 14));
    CHECK(store.load("raw")->size() == 14);
    CHECK(store.keys() == std::vector<std::string>{"bundle_v", "raw"});
    CHECK(store.verify().empty());

    const auto p = store.path_for("raw");
    const auto size = fs::file_size(p);
    fs::resize_file(p, size - 3);
    CHECK_THROWS_AS(store.load("raw"), CorruptArtifact);
    CHECK(store.verify() == std::vector<std::string>{"raw"});

    {
        std::fstream f(store.path_for("bundle_v"), std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(-2, std::ios::end);
        f.put('#');
    }
    CHECK_THROWS_AS(store.load_json("bundle_v"), CorruptArtifact);
    CHECK(store.clear() == 2);
    CHECK(store.keys().empty());
    CHECK_THROWS(store.store("../escape", "x"));
}

}
