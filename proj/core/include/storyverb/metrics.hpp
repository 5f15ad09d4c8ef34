#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "storyverb/task_types.hpp"

namespace storyverb {

using Tokens = std::vector<std::string>;

// Lowercase, punctuation split off as separate tokens, whitespace collapsed.
Tokens tokenize(std::string_view text);

// ---- BLEU ---------------------------------------------------------------

struct BleuOptions {
    bool add_one_smoothing = false;   // applied to orders >= 2
};

// Clipped n-gram statistics of one hypothesis against its references.
struct BleuStats {
    std::vector<double> matches;   // per order 1..max_n
    std::vector<double> totals;
    double hyp_len = 0;
    double ref_len = 0;            // closest reference length (ties: shorter)

    void add(const BleuStats& o);
};

BleuStats bleu_stats(const Tokens& hyp, std::span<const Tokens> refs, int max_n = 4);
double bleu_from_stats(const BleuStats& stats, int n, BleuOptions opts = {});

// Geometric mean of clipped k-gram precisions k=1..n times brevity penalty,
// on a 0..100 scale. Empty hypothesis scores 0.
double bleu_n(const Tokens& hyp, std::span<const Tokens> refs, int n, BleuOptions opts = {});

// Corpus-level: clipped counts summed over items before the geometric mean.
double corpus_bleu(std::span<const Tokens> hyps, std::span<const std::vector<Tokens>> refs, int n,
                   BleuOptions opts = {});

// ---- ROUGE-L --------------------------------------------------------------

std::size_t lcs_length(const Tokens& a, const Tokens& b);

// LCS F-measure, 0..100. beta = 1 is plain F1; larger beta favours recall.
double rouge_l(const Tokens& hyp, const Tokens& ref, double beta = 1.0);

// ---- METEOR ---------------------------------------------------------------

struct MeteorParams {
    double alpha = 0.9;
    double beta = 3.0;
    double gamma = 0.5;
};

struct MeteorAlignment {
    std::size_t matches = 0;
    std::size_t chunks = 0;
};

// Exact matches first, then Porter-stem matches over the remaining tokens.
MeteorAlignment meteor_align(const Tokens& hyp, const Tokens& ref);

// Fmean * (1 - gamma * (chunks/matches)^beta), 0..100.
double meteor(const Tokens& hyp, const Tokens& ref, MeteorParams params = {});

// ---- CIDEr-D --------------------------------------------------------------

// Document frequencies come from the reference sets handed to the
// constructor; scoring is against that corpus only.
class CiderD {
public:
    explicit CiderD(std::span<const std::vector<Tokens>> refs, double sigma = 6.0, int max_n = 4);

    // Item score on the x10 scale (at most 10).
    double item_score(const Tokens& hyp, std::size_t item) const;
    std::size_t size() const { return refs_.size(); }

private:
    using NgramCounts = std::map<std::vector<std::string>, double>;
    struct Vec {
        std::vector<std::map<std::vector<std::string>, double>> weights;
        std::vector<double> norms;
        double length = 0;
    };
    Vec vectorize(const Tokens& tokens) const;

    double sigma_;
    int max_n_;
    double log_ref_count_;
    std::map<std::vector<std::string>, double> doc_freq_;
    std::vector<std::vector<Vec>> refs_;
};

// Mean item CIDEr-D. Throws std::invalid_argument on an empty or ragged corpus.
double cider(std::span<const Tokens> hyps, std::span<const std::vector<Tokens>> refs);
std::vector<double> cider_items(std::span<const Tokens> hyps, std::span<const std::vector<Tokens>> refs);

// ---- accuracy ------------------------------------------------------------

struct GoldLabel {
    std::string video_id;
    std::string label;
};

struct GoldLabelSet {
    std::string video_id;
    std::set<std::string> labels;
};

// Percentage of exact label matches; unknown labels count as wrong. Throws
// std::invalid_argument when prediction and gold ids differ.
double top1_accuracy(std::span<const Prediction> preds, std::span<const GoldLabel> gold);
// Percentage of items whose predicted label is in the gold set.
double multilabel_hit_accuracy(std::span<const Prediction> preds,
                               std::span<const GoldLabelSet> gold);

// ---- reports ---------------------------------------------------------------

inline constexpr std::string_view kGenerationColumns[] = {
    "METEOR", "CIDEr", "ROUGE-L", "BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4"};

struct ItemScores {
    std::string video_id;
    std::map<std::string, double> scores;
};

struct MetricReport {
    std::string title;
    std::map<std::string, double> corpus;
    std::vector<ItemScores> items;
    std::size_t n_items = 0;
};

// Generation metrics over a corpus. METEOR and ROUGE-L take the best
// reference per item; BLEU is corpus-level; CIDEr is reported x10 so every
// column lies in 0..100.
MetricReport generation_report(std::string title, std::span<const std::string> video_ids,
                               std::span<const std::string> hyps,
                               std::span<const std::vector<std::string>> refs);

// Table-style text: header row of metric names, one row of values.
std::string format_report(const std::vector<MetricReport>& reports);
nlohmann::json report_to_json(const MetricReport& report);

}  // namespace storyverb
