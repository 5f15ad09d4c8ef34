// Acceptance criteria runner. Prints one PASS/FAIL line per criterion; exits
// nonzero when a gating criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "cli_harness.hpp"
#include "oracles.hpp"
#include "storyverb/annotations.hpp"
#include "storyverb/dataset.hpp"
#include "storyverb/errors.hpp"
#include "storyverb/frame_source.hpp"
#include "storyverb/keyframes.hpp"
#include "storyverb/metrics.hpp"
#include "storyverb/prompt.hpp"
#include "storyverb/retrieval.hpp"
#include "storyverb/tasks.hpp"
#include "storyverb/text.hpp"

using namespace storyverb;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = STORYVERB_TEST_FIXTURES_DIR;
const fs::path kData = STORYVERB_TEST_DATA_DIR;
const fs::path kGolden = STORYVERB_TEST_GOLDEN_DIR;

// Collects failed checks for one criterion.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        ++total_;
        if (!ok && failures_.size() < 8) failures_.push_back(what);
        if (!ok) ++failed_;
    }
    void near(double got, double want, double tol, const std::string& what) {
        std::ostringstream s;
        s << what << ": got " << got << ", want " << want << " +- " << tol;
        expect(std::abs(got - want) <= tol, s.str());
    }
    bool ok() const { return failed_ == 0; }
    std::size_t total() const { return total_; }
    std::size_t failed() const { return failed_; }
    const std::vector<std::string>& failures() const { return failures_; }
    std::vector<std::string> notes;

private:
    std::size_t total_ = 0;
    std::size_t failed_ = 0;
    std::vector<std::string> failures_;
};

struct Criterion {
    int id;
    std::string name;
    std::function<void(Checks&)> body;
    double time_limit_s = 0;   // 0 = none
};

Tokens random_tokens(std::mt19937& rng, const std::vector<std::string>& vocab, std::size_t max_len) {
    Tokens t;
    const std::size_t len = 1 + rng() % max_len;
    for (std::size_t i = 0; i < len; ++i) t.push_back(vocab[rng() % vocab.size()]);
    return t;
}

Tokens unique_tokens(std::mt19937& rng, const std::vector<std::string>& vocab, std::size_t max_len) {
    auto pool = vocab;
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(1 + rng() % std::min(max_len, pool.size()));
    return pool;
}

// ---- 1 ----------------------------------------------------------------------

void metric_conformance(Checks& c) {
    constexpr double eps = 1e-6;
    auto T = [](std::string_view s) { return tokenize(s); };
    const std::vector<Tokens> cat{T("the cat sat on the mat")};
    for (int n = 1; n <= 4; ++n) c.near(bleu_n(cat[0], cat, n), 100.0, eps, "BLEU identity n=" + std::to_string(n));
    c.near(bleu_n(T("the the the"), std::vector<Tokens>{T("the cat")}, 1), 100.0 / 3.0, eps, "BLEU-1 clipped");
    c.near(bleu_n(T("mat the"), cat, 2), 0.0, eps, "BLEU-2 zero overlap");
    c.near(bleu_n({}, cat, 1), 0.0, eps, "BLEU empty hypothesis");
    c.near(rouge_l(T("a b"), T("c d")), 0.0, eps, "ROUGE-L disjoint");
    c.near(rouge_l(T("a c e"), T("a b c d e")), 75.0, eps, "ROUGE-L LCS 3");
    c.near(rouge_l(cat[0], cat[0]), 100.0, eps, "ROUGE-L identity");
    c.near(meteor(T("a b"), T("c d")), 0.0, eps, "METEOR no match");
    c.near(meteor(T("the cat sat"), T("the cat sat")), 100.0 * (1 - 0.5 / 27.0), eps, "METEOR three words");
    c.near(meteor(T("cat"), T("cat")), 50.0, eps, "METEOR one word");
    {
        std::vector<Tokens> hyps{T("a dog runs on grass"), T("blue car parked outside")};
        std::vector<std::vector<Tokens>> refs{{hyps[0]}, {hyps[1]}};
        c.near(cider(hyps, refs), 10.0, eps, "CIDEr-D disjoint identity corpus");
        std::vector<Tokens> miss{T("zebra stripes"), hyps[1]};
        c.near(cider_items(miss, refs)[0], 0.0, eps, "CIDEr-D orthogonal item");
        CiderD scorer(refs);
        const std::vector<std::string> subs{"zebra", "a", "car", "grass", "dog"};
        for (std::size_t item = 0; item < 2; ++item) {
            const double base = scorer.item_score(hyps[item], item);
            for (std::size_t p = 0; p < hyps[item].size(); ++p)
                for (const auto& w : subs) {
                    if (w == hyps[item][p]) continue;
                    auto h = hyps[item];
                    h[p] = w;
                    c.expect(scorer.item_score(h, item) <= base + 1e-12, "CIDEr-D single token damage");
                }
        }
    }

    // randomized cross-checks, sequences of length <= 12
    std::mt19937 rng(20240601);
    const std::vector<std::string> small{"a", "b", "c", "d", "e", "f"};
    const std::vector<std::string> wide{"red", "blue", "green", "cat", "dog", "sun", "sea", "sky", "tree", "road",
                                        "car", "man", "box", "cup", "pen", "hat", "map", "key", "bag", "bed"};
    std::vector<Tokens> corpus_h;
    std::vector<std::vector<Tokens>> corpus_r;
    for (int t = 0; t < 200; ++t) {
        const auto h = random_tokens(rng, small, 12);
        std::vector<Tokens> refs;
        const int nrefs = 1 + static_cast<int>(rng() % 3);
        for (int k = 0; k < nrefs; ++k) refs.push_back(random_tokens(rng, small, 12));
        for (int n = 1; n <= 4; ++n)
            c.near(bleu_n(h, refs, n), oracle::bleu(h, refs, n), eps, "BLEU-" + std::to_string(n) + " random");
        c.expect(lcs_length(h, refs[0]) == oracle::lcs_bruteforce(h, refs[0]), "LCS random");
        c.near(rouge_l(h, refs[0]), oracle::rouge_l(h, refs[0]), eps, "ROUGE-L random");
        const auto uh = unique_tokens(rng, wide, 12);
        const auto ur = unique_tokens(rng, wide, 12);
        c.near(meteor(uh, ur), oracle::meteor_unique(uh, ur), eps, "METEOR random");
        corpus_h.push_back(h);
        corpus_r.push_back(refs);
    }
    for (int n = 1; n <= 4; ++n)
        c.near(corpus_bleu(corpus_h, corpus_r, n), oracle::corpus_bleu(corpus_h, corpus_r, n), eps, "corpus BLEU");
    for (std::size_t start = 0; start < corpus_h.size(); start += 20) {
        std::vector<Tokens> h(corpus_h.begin() + start, corpus_h.begin() + start + 20);
        std::vector<std::vector<Tokens>> r(corpus_r.begin() + start, corpus_r.begin() + start + 20);
        c.near(cider(h, r), oracle::cider_d(h, r), eps, "CIDEr-D random corpus");
        for (double s : cider_items(h, r)) c.expect(s >= 0 && s <= 10.0 + 1e-9, "CIDEr-D item within [0,10]");
    }
    c.notes.push_back("200 random items, 4 BLEU orders, LCS, ROUGE-L, METEOR, corpus BLEU, 10 CIDEr-D corpora");
}

// ---- 2 ----------------------------------------------------------------------

double uniform_guess_accuracy(std::size_t n_options, std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Prediction> preds;
    std::vector<GoldLabel> gold;
    preds.reserve(trials);
    gold.reserve(trials);
    for (std::size_t i = 0; i < trials; ++i) {
        const std::string id = std::to_string(i);
        Prediction p;
        p.video_id = id;
        p.label = std::to_string(uniform_below(rng, n_options));
        preds.push_back(std::move(p));
        gold.push_back({id, std::to_string(uniform_below(rng, n_options))});
    }
    return top1_accuracy(preds, gold);
}

double retrieval_guess_accuracy(std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::string> pool;
    for (int i = 0; i < 60; ++i) pool.push_back("statement " + std::to_string(i));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        const auto opts = build_retrieval_options("the target", pool, rng());
        if (opts[uniform_below(rng, opts.size())] == "the target") ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(trials);
}

void random_baselines(Checks& c) {
    const std::size_t trials = 100'000;
    const auto catalog = TaskCatalog::load(kData);
    const double topic = uniform_guess_accuracy(catalog.topics.size(), trials, 1);
    const double clubbed = uniform_guess_accuracy(kEmotionCategories.size(), trials, 2);
    const double retrieval = retrieval_guess_accuracy(trials, 3);
    c.near(topic, 2.63, 0.3, "topic random");
    c.near(clubbed, 14.3, 0.7, "clubbed emotion random");
    c.near(retrieval, 3.34, 0.4, "retrieval random");
    std::ostringstream s;
    s.precision(4);
    s << "topic " << topic << ", clubbed emotion " << clubbed << ", retrieval " << retrieval;
    c.notes.push_back(s.str());
}

// ---- 3 ----------------------------------------------------------------------

// Panned texture; speeds[i] is the motion into frame i, cut_at starts new scenes.
std::vector<Frame> motion_clip(const std::vector<int>& speeds, const std::set<int>& cut_at) {
    std::vector<Frame> frames;
    int shift = 0;
    std::uint32_t scene = 11;
    for (int i = 0; i < static_cast<int>(speeds.size()); ++i) {
        if (cut_at.count(i)) {
            scene += 97;
            shift = 0;
        } else {
            shift += speeds[static_cast<std::size_t>(i)];
        }
        frames.push_back(oracle::noise_frame(scene, 64, 64, i, shift));
    }
    return frames;
}

std::vector<std::int64_t> select(const std::vector<Frame>& frames, const PipelineConfig& cfg, SamplingMethod* method) {
    VideoAsset v;
    v.video_id = "synthetic";
    v.uri = "file://synthetic";
    v.duration_s = static_cast<double>(frames.size());
    v.title = "synthetic";
    VectorFrameSource src(frames, 1.0);
    auto ks = select_keyframes(v, src, cfg);
    if (method) *method = ks.method;
    std::vector<std::int64_t> out;
    for (const auto& f : ks.frames) out.push_back(f.index);
    return out;
}

void keyframe_suite(Checks& c) {
    std::vector<std::pair<std::string, std::vector<Frame>>> suite;
    suite.emplace_back("static", oracle::clip(30, {0}));
    suite.emplace_back("single cut", oracle::clip(40, {0, 20}));
    suite.emplace_back("multi cut", oracle::clip(60, {0, 12, 25, 26, 41}));
    {
        std::vector<Frame> black;
        for (int i = 0; i < 20; ++i) black.push_back(oracle::flat_frame(0, 64, 64, i));
        suite.emplace_back("all black", black);
    }
    {
        std::vector<int> speeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 0, 3, 6, 2, 5, 8, 1, 4, 7, 0, 2, 0, 0, 0, 0, 0};
        suite.emplace_back("variable motion", motion_clip(speeds, {9, 18}));
    }
    {
        auto mixed = oracle::clip(30, {0, 10, 20});
        mixed[20] = oracle::flat_frame(255, 64, 64, 20);   // a cut onto a white frame
        suite.emplace_back("cut to blank", mixed);
    }

    PipelineConfig cfg;
    for (const auto& [name, frames] : suite) {
        SamplingMethod method{};
        const auto got = select(frames, cfg, &method);
        const auto want = oracle::flow_selection(frames, cfg);
        if (!want.empty()) {
            c.expect(method == SamplingMethod::flow && got == want, name + ": flow selection equals oracle");
        } else {
            c.expect(method == SamplingMethod::uniform, name + ": empty selection falls back to uniform");
            std::vector<std::int64_t> uniform;
            for (const auto& f : frames)
                if (f.mean_luma() > cfg.blank_low_luma && f.mean_luma() < cfg.blank_high_luma) uniform.push_back(f.index);
            if (uniform.size() > static_cast<std::size_t>(cfg.max_keyframes)) {
                std::vector<std::int64_t> picked;
                for (auto p : uniform_positions(uniform.size(), static_cast<std::size_t>(cfg.max_keyframes)))
                    picked.push_back(uniform[p]);
                uniform = picked;
            }
            c.expect(got == uniform, name + ": uniform fallback frames");
        }
    }
    c.expect(select(suite[1].second, cfg, nullptr) == std::vector<std::int64_t>{20}, "single cut selects the cut");
    c.expect(select(suite[3].second, cfg, nullptr).empty(), "all black selects nothing");

    // threshold sweep
    std::size_t nonempty_steps = 0;
    for (const auto& [name, frames] : suite) {
        std::vector<std::int64_t> previous;
        bool first = true;
        for (int k = 0; k < 20; ++k) {
            PipelineConfig swept = cfg;
            swept.flow_threshold = 6.0 * k;
            SamplingMethod method{};
            auto got = select(frames, swept, &method);
            if (method != SamplingMethod::flow) got.clear();
            c.expect(got == oracle::flow_selection(frames, swept), name + ": sweep matches oracle");
            if (!first) {
                c.expect(std::includes(previous.begin(), previous.end(), got.begin(), got.end()),
                         name + ": raising the threshold never adds frames");
            }
            if (!got.empty()) ++nonempty_steps;
            previous = got;
            first = false;
        }
    }
    c.notes.push_back(std::to_string(suite.size()) + " clips x 20 thresholds, " + std::to_string(nonempty_steps) +
                      " non-empty selections");
}

// ---- 4 ----------------------------------------------------------------------

std::vector<std::string> e2e_args(std::string verb, const fs::path& out) {
    return {std::move(verb), "--config", (kFixtures / "e2e/config.yaml").string(), "--dataset", "video_ads", "--out",
            out.string()};
}

bool full_run(const fs::path& out, Checks& c) {
    const std::vector<std::vector<std::string>> steps{
        e2e_args("verbalize", out),
        e2e_args("story", out),
        [&] {
            auto a = e2e_args("tasks", out);
            a.insert(a.end(), {"--task", "topic,emotion,emotion_clubbed,action_gen,reason_gen,reason_given_action"});
            return a;
        }(),
        [&] {
            auto a = e2e_args("evaluate", out);
            a.insert(a.end(), {"--pred", out.string()});
            return a;
        }(),
    };
    for (const auto& s : steps) {
        const auto r = harness::run_cli(s);
        c.expect(r.code == 0, s[0] + " exits 0 (got " + std::to_string(r.code) + "): " + r.err);
        if (r.code != 0) return false;
    }
    return true;
}

void end_to_end(Checks& c) {
    const auto a = harness::fresh_dir("storyverb_acceptance_run_a");
    const auto b = harness::fresh_dir("storyverb_acceptance_run_b");
    if (!full_run(a, c) || !full_run(b, c)) return;
    const auto ta = harness::read_tree(a);
    const auto tb = harness::read_tree(b);
    c.expect(ta == tb, "two runs produce byte-identical trees");
    for (const auto* f : {"stories.jsonl", "predictions.jsonl", "report.txt", "report.json", "prompts/ad_cola.txt",
                          "manifests/verbalize.json", "manifests/story.json", "manifests/tasks.json"})
        c.expect(ta.count(f) == 1, std::string("output present: ") + f);
    c.expect(ta.size() > 20, "output tree is populated");

    c.expect(ta.count("prompts/ad_cola.txt") && ta.at("prompts/ad_cola.txt") ==
                                                    read_file((kGolden / "ad_cola_prompt.txt").string()),
             "ad_cola prompt matches golden");
    c.expect(ta.count("prompts/long_doc.txt") && ta.at("prompts/long_doc.txt") ==
                                                     read_file((kGolden / "long_doc_prompt.txt").string()),
             "long_doc prompt matches golden");

    const std::string doc = ta.count("prompts/long_doc.txt") ? ta.at("prompts/long_doc.txt") : "";
    const auto templates = PromptTemplates::load(kData / "prompts/story.tmpl");
    c.expect(!doc.empty(), "long_doc prompt exists");
    c.expect(doc.find(templates.raw("label_ocr")) == std::string::npos, "long_doc prompt has no OCR block");
    c.expect(doc.find(templates.raw("label_metadata")) == std::string::npos, "long_doc prompt has no metadata block");
    c.expect(doc.find("presents") == std::string::npos, "long_doc prompt has no OCR words");
    c.expect(doc.find("documentary studio") == std::string::npos, "long_doc prompt has no brand description");
    c.expect(doc.find(templates.raw("label_captions")) != std::string::npos, "long_doc prompt keeps captions");
    c.expect(doc.find(templates.raw("label_transcript")) != std::string::npos, "long_doc prompt keeps transcript");
    const std::string cola = ta.count("prompts/ad_cola.txt") ? ta.at("prompts/ad_cola.txt") : "";
    c.expect(cola.find(templates.raw("label_ocr")) != std::string::npos, "short ad prompt keeps OCR");
    c.expect(cola.find(templates.raw("label_metadata")) != std::string::npos, "short ad prompt keeps metadata");

    fs::remove_all(a);
    fs::remove_all(b);
    c.notes.push_back(std::to_string(ta.size()) + " output files compared");
}

// ---- 5 ----------------------------------------------------------------------

AnnotationSheet make_sheet(std::string annotator, std::string video, const std::array<bool, kQuestionCount>& answers) {
    return {std::move(annotator), std::move(video), answers};
}

void annotation_properties(Checks& c) {
    const auto qmap = QuestionStrategyMap::load(kData / "persuasion_questions.json");
    std::array<bool, kQuestionCount> none{};
    std::array<bool, kQuestionCount> expert{};
    expert[0] = true;

    auto r1 = aggregate_annotations(std::vector{make_sheet("a", "v", none), make_sheet("b", "v", none)}, qmap);
    c.expect(r1.retained.size() == 1 && r1.retained[0].agreement == 1.0 &&
                 r1.retained[0].strategies == std::set<std::string>{"Unclear"},
             "all-no example gives {Unclear} at 1.0");
    auto r2 = aggregate_annotations(std::vector{make_sheet("a", "v", expert), make_sheet("b", "v", expert)}, qmap);
    c.expect(r2.retained.size() == 1 && r2.retained[0].agreement == 1.0 &&
                 r2.retained[0].strategies == std::set<std::string>{"Authority"},
             "expert example gives {Authority} at 1.0");
    std::array<bool, kQuestionCount> seven{};
    for (int q = 0; q < 7; ++q) seven[q] = true;
    auto r3 = aggregate_annotations(std::vector{make_sheet("a", "v", seven), make_sheet("b", "v", none)}, qmap);
    c.expect(r3.retained.empty() && r3.dropped == std::vector<std::string>{"v"}, "8/15 agreement is dropped");
    auto r3b = aggregate_annotations(std::vector{make_sheet("a", "v", seven), make_sheet("b", "v", none)}, qmap, 0.5);
    c.expect(r3b.retained.size() == 1, "8/15 agreement kept at threshold 0.5");
    if (!r3b.retained.empty()) c.near(r3b.retained[0].agreement, 8.0 / 15.0, 1e-12, "8/15 agreement value");

    std::mt19937 rng(777);
    for (int t = 0; t < 1000; ++t) {
        const int videos = 1 + static_cast<int>(rng() % 4);
        std::vector<AnnotationSheet> sheets;
        std::map<std::string, std::vector<AnnotationSheet>> by_video;
        const double yes_rate = (rng() % 5) / 4.0;
        for (int v = 0; v < videos; ++v) {
            const int annotators = 2 + static_cast<int>(rng() % 4);
            const std::string vid = "v" + std::to_string(v);
            for (int a = 0; a < annotators; ++a) {
                std::array<bool, kQuestionCount> ans{};
                for (auto& x : ans) x = std::uniform_real_distribution<double>(0, 1)(rng) < yes_rate;
                sheets.push_back(make_sheet("ann" + std::to_string(a), vid, ans));
                by_video[vid].push_back(sheets.back());
            }
        }
        const double threshold = (rng() % 11) / 10.0;
        const auto base = aggregate_annotations(sheets, qmap, threshold);

        // permutation of sheets and renaming of annotators
        auto shuffled = sheets;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (auto& s : shuffled) s.annotator_id = "x" + s.annotator_id + "y";
        const auto perm = aggregate_annotations(shuffled, qmap, threshold);
        c.expect(perm.retained == base.retained && perm.dropped == base.dropped, "permutation invariance");

        // agreement equals the pairwise oracle; retained sets are valid
        const auto all = aggregate_annotations(sheets, qmap, 0.0);
        for (const auto& r : all.retained) {
            c.near(r.agreement, oracle::agreement(by_video[r.video_id]), 1e-12, "agreement oracle");
            c.expect(!r.strategies.empty(), "strategies non-empty");
            for (const auto& s : r.strategies)
                c.expect(std::find(qmap.vocabulary().begin(), qmap.vocabulary().end(), s) != qmap.vocabulary().end(),
                         "strategy in vocabulary");
        }
        for (const auto& r : base.retained) c.expect(r.agreement >= threshold, "retained agreement clears threshold");

        // monotone filtering in the threshold
        const auto higher = aggregate_annotations(sheets, qmap, std::min(1.0, threshold + 0.1));
        std::set<std::string> lo, hi;
        for (const auto& r : base.retained) lo.insert(r.video_id);
        for (const auto& r : higher.retained) hi.insert(r.video_id);
        c.expect(std::includes(lo.begin(), lo.end(), hi.begin(), hi.end()), "raising min_agreement never adds videos");

        // settling one split question never lowers agreement
        auto& first_video = by_video.begin()->second;
        auto edited = first_video;
        for (std::size_t q = 0; q < kQuestionCount; ++q) {
            const bool split = std::any_of(edited.begin(), edited.end(),
                                           [&](const auto& s) { return s.answers[q] != edited[0].answers[q]; });
            if (split) {
                for (auto& s : edited) s.answers[q] = edited[0].answers[q];
                break;
            }
        }
        const double before = aggregate_annotations(first_video, qmap, 0.0).retained[0].agreement;
        const double after = aggregate_annotations(edited, qmap, 0.0).retained[0].agreement;
        c.expect(after >= before, "agreement grows when a split question becomes unanimous");

        // unanimity
        const int k = 2 + static_cast<int>(rng() % 5);
        std::vector<AnnotationSheet> same;
        for (int a = 0; a < k; ++a) same.push_back(make_sheet("u" + std::to_string(a), "u", first_video[0].answers));
        const auto un = aggregate_annotations(same, qmap, 1.0);
        c.expect(un.retained.size() == 1 && un.retained[0].agreement == 1.0, "unanimous sheets agree at exactly 1.0");

        // empty affirmation
        std::vector<AnnotationSheet> silent;
        for (int a = 0; a < k; ++a) {
            auto ans = first_video[0].answers;
            for (auto& x : ans) x = false;
            if (a == 0) ans[rng() % kQuestionCount] = true;   // a lone yes is not a majority
            silent.push_back(make_sheet("s" + std::to_string(a), "s", ans));
        }
        const auto sil = aggregate_annotations(silent, qmap, 0.0);
        c.expect(sil.retained.size() == 1 && sil.retained[0].strategies == std::set<std::string>{"Unclear"},
                 "no affirmed question gives {Unclear}");
    }
    c.notes.push_back("1000 random sheet sets");
}

// ---- 6 ----------------------------------------------------------------------

void retrieval_protocol(Checks& c) {
    std::vector<std::string> pool;
    for (int i = 0; i < 40; ++i) pool.push_back("distractor " + std::to_string(i));
    pool.push_back("target");
    pool.push_back("distractor 3");

    const int draws = 10'000;
    std::vector<int> slot(kRetrievalOptions, 0);
    std::size_t bad = 0;
    for (int s = 0; s < draws; ++s) {
        const auto opts = build_retrieval_options("target", pool, static_cast<std::uint64_t>(s));
        const std::set<std::string> distinct(opts.begin(), opts.end());
        if (opts.size() != kRetrievalOptions || distinct.size() != kRetrievalOptions ||
            std::count(opts.begin(), opts.end(), "target") != 1)
            ++bad;
        slot[static_cast<std::size_t>(std::find(opts.begin(), opts.end(), "target") - opts.begin()) % kRetrievalOptions]++;
    }
    c.expect(bad == 0, "30 distinct options with the target once (" + std::to_string(bad) + " bad)");
    const double p = 1.0 / kRetrievalOptions;
    const double sigma = std::sqrt(p * (1 - p) / draws);
    double worst = 0;
    for (std::size_t k = 0; k < slot.size(); ++k) {
        const double f = static_cast<double>(slot[k]) / draws;
        worst = std::max(worst, std::abs(f - p) / sigma);
        c.near(f, p, 3 * sigma, "target slot " + std::to_string(k) + " frequency");
    }

    // token-overlap backend as the oracle answerer
    const auto catalog = TaskCatalog::load(kData);
    const auto templates = PromptTemplates::load(kData / "prompts/task.tmpl");
    TokenOverlapBackend overlap;
    std::mt19937 rng(4242);
    auto answer = [&](const std::vector<std::string>& options, const std::string& story_text) {
        GeneratedStory st;
        st.video_id = "v";
        st.text = story_text;
        st.word_count = count_words(story_text);
        const auto prompt = assemble_task_prompt(catalog.spec(TaskId::action_retrieval, options), st, templates);
        GenerationRequest req;
        req.prompt = prompt.rendered;
        req.backend_id = "overlap";
        return parse_label(overlap.complete(req), options);
    };

    const int separable = 300;
    int correct = 0;
    for (int t = 0; t < separable; ++t) {
        std::vector<std::string> distractors;
        for (int i = 0; i < 35; ++i)
            distractors.push_back("I should buy item" + std::to_string(t) + "x" + std::to_string(i) + " today");
        const std::string target = "I should visit harbor" + std::to_string(t) + " lighthouse" + std::to_string(t) +
                                   " ferry" + std::to_string(t);
        const std::string story = "A family rides the ferry" + std::to_string(t) + " past harbor" + std::to_string(t) +
                                  " toward lighthouse" + std::to_string(t) + " at dawn.";
        const auto options = build_retrieval_options(target, distractors, rng());
        if (answer(options, story) == target) ++correct;
    }
    c.expect(correct == separable, "separable instances answered correctly (" + std::to_string(correct) + "/" +
                                       std::to_string(separable) + ")");

    const int symmetric = 3000;
    int hits = 0;
    for (int t = 0; t < symmetric; ++t) {
        std::vector<std::string> distractors;
        for (int i = 0; i < 29; ++i) distractors.push_back("option " + std::to_string(t) + " alt" + std::to_string(i));
        const std::string target = "option " + std::to_string(t) + " gold";
        const std::string story = "The option " + std::to_string(t) + " is shown.";
        const auto options = build_retrieval_options(target, distractors, rng());
        if (answer(options, story) == target) ++hits;
    }
    const double acc = static_cast<double>(hits) / symmetric;
    const double sym_sigma = std::sqrt(p * (1 - p) / symmetric);
    c.near(acc, p, 3 * sym_sigma, "symmetric instances near chance");
    std::ostringstream s;
    s.precision(3);
    s << "worst slot deviation " << worst << " sigma; symmetric accuracy " << 100 * acc << "%";
    c.notes.push_back(s.str());
}

// ---- 7 ----------------------------------------------------------------------

void dataset_statistics(Checks& c) {
    const auto catalog = TaskCatalog::load(kData);
    {
        const auto st = corpus_stats(load_dataset(DatasetName::video_story, kFixtures / "video_story", catalog));
        c.expect(st.items == 4, "video_story items");
        c.expect(st.with_media == 1, "video_story with media");
        c.near(st.mean_duration_s, (30 + 36 + 48 + 66) / 4.0, 0, "video_story mean duration");
        c.near(st.mean_story_words, (18 + 17 + 16 + 19) / 4.0, 0, "video_story mean story words");
    }
    {
        const auto st = corpus_stats(load_dataset(DatasetName::persuasion, kFixtures / "persuasion", catalog));
        c.expect(st.items == 5, "persuasion items");
        c.near(st.mean_duration_s, 30.0, 0, "persuasion mean duration");
        const std::map<std::string, std::size_t> hand{{"Authority", 2}, {"Concreteness", 1}, {"Foot-in-the-Door", 1},
                                                      {"Reciprocity", 1}, {"Scarcity", 1},     {"Social Proof", 2},
                                                      {"Unclear", 1}};
        c.expect(st.label_histogram == hand, "persuasion strategy histogram");
    }
    {
        const auto st = corpus_stats(load_dataset(DatasetName::video_ads, kFixtures / "e2e/corpus", catalog));
        c.expect(st.items == 6, "ads items");
        c.expect(st.with_media == 5, "ads with media");
        c.near(st.mean_duration_s, (15 + 24 + 30 + 12 + 20 + 600) / 6.0, 1e-12, "ads mean duration");
        const std::map<std::string, std::size_t> hand{{"charities", 1}, {"clothing", 1}, {"financial", 1},
                                                      {"game", 1},      {"soda", 1},     {"travel", 1}};
        c.expect(st.label_histogram == hand, "ads topic histogram");
    }
    {
        const auto st = corpus_stats(DatasetManifest{});
        c.expect(st.items == 0 && st.mean_duration_s == 0.0 && st.mean_story_words == 0.0, "empty manifest");
    }

    struct Bad {
        std::string dir;
        DatasetName name;
        std::string mention;
    };
    const std::vector<Bad> cases{{"four_reasons", DatasetName::video_ads, "got 5 and 4"},
                                 {"six_actions", DatasetName::video_ads, "got 6 and 5"},
                                 {"bad_topic", DatasetName::video_ads, "spaceships"},
                                 {"missing_labels", DatasetName::video_ads, "missing labels"},
                                 {"bad_strategy", DatasetName::persuasion, "Flattery"},
                                 {"one_annotator", DatasetName::persuasion, "two annotators"},
                                 {"bad_json", DatasetName::video_story, "labels.json"},
                                 {"missing_story", DatasetName::video_story, "story"},
                                 {"duplicate_id", DatasetName::video_story, "duplicate video id"}};
    for (const auto& b : cases) {
        bool rejected = false;
        std::string message;
        try {
            load_dataset(b.name, kFixtures / "malformed" / b.dir, catalog);
        } catch (const DatasetError& e) {
            rejected = true;
            message = e.what();
        } catch (const std::exception& e) {
            message = std::string("wrong error type: ") + e.what();
        }
        c.expect(rejected, b.dir + " rejected with DatasetError " + message);
        c.expect(message.find(b.mention) != std::string::npos, b.dir + " error names '" + b.mention + "': " + message);
    }
    c.notes.push_back(std::to_string(cases.size()) + " malformed corpora rejected");
}

// ---- 8 ----------------------------------------------------------------------

// Needs STORYVERB_LIVE_CONFIG (real backends) and STORYVERB_LIVE_VIDEO.
bool live_smoke(Checks& c) {
    const char* config = std::getenv("STORYVERB_LIVE_CONFIG");
    const char* video = std::getenv("STORYVERB_LIVE_VIDEO");
    if (!config || !video) return false;
    const auto out = harness::fresh_dir("storyverb_acceptance_live");
    for (const auto* verb : {"verbalize", "story"}) {
        auto r = harness::run_cli({verb, "--config", config, "--dataset", "video_ads", "--out", out.string()});
        c.expect(r.code == 0 || r.code == 4, std::string(verb) + " ran: " + r.err);
    }
    bool found = false;
    std::istringstream lines(read_file((out / "stories.jsonl").string()));
    for (std::string line; std::getline(lines, line);) {
        auto j = nlohmann::json::parse(line);
        if (j["video_id"] != video) continue;
        found = true;
        const auto words = count_words(j["text"].get<std::string>());
        c.expect(words >= 50, "live story has " + std::to_string(words) + " words");
        c.notes.push_back("live story: " + std::to_string(words) + " words");
    }
    c.expect(found, std::string("story generated for ") + video);
    return true;
}

}  // namespace

int main() {
    setenv("SOURCE_DATE_EPOCH", "1700000000", 0);
    const std::vector<Criterion> criteria{
        {1, "metric conformance", metric_conformance, 10.0},
        {2, "random baselines", random_baselines},
        {3, "keyframe selector", keyframe_suite},
        {4, "end-to-end determinism", end_to_end, 30.0},
        {5, "annotation aggregation", annotation_properties},
        {6, "retrieval protocol", retrieval_protocol},
        {7, "dataset statistics", dataset_statistics},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Checks c;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            cr.body(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("unexpected exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cr.time_limit_s > 0) {
            std::ostringstream s;
            s << "runtime " << secs << " s under " << cr.time_limit_s << " s";
            c.expect(secs < cr.time_limit_s, s.str());
        }
        std::printf("criterion %d %-24s %s  (%zu checks, %.2f s)\n", cr.id, cr.name.c_str(), c.ok() ? "PASS" : "FAIL",
                    c.total(), secs);
        for (const auto& n : c.notes) std::printf("    %s\n", n.c_str());
        for (const auto& f : c.failures()) std::printf("    failed: %s\n", f.c_str());
        if (!c.ok()) ++failed;
    }
    {
        Checks c;
        bool ran = false;
        try {
            ran = live_smoke(c);
        } catch (const std::exception& e) {
            ran = true;
            c.expect(false, e.what());
        }
        if (!ran) {
            std::printf("criterion 8 %-24s SKIP  (set STORYVERB_LIVE_CONFIG and STORYVERB_LIVE_VIDEO; not gating)\n",
                        "live smoke");
        } else {
            std::printf("criterion 8 %-24s %s  (not gating)\n", "live smoke", c.ok() ? "PASS" : "FAIL");
            for (const auto& n : c.notes) std::printf("    %s\n", n.c_str());
            for (const auto& f : c.failures()) std::printf("    failed: %s\n", f.c_str());
        }
    }
    return failed == 0 ? 0 : 1;
}
