#include "storyverb/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "storyverb/stemmer.hpp"
#include "storyverb/text.hpp"

namespace storyverb {

Tokens tokenize(std::string_view text) {
    Tokens out;
    std::string cur;
    const auto flush = [&] {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            flush();
        } else if (is_word_char(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else {
            flush();
            out.emplace_back(1, ch);
        }
    }
    flush();
    return out;
}

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, double> ngram_counts(const Tokens& t, int n) {
    std::map<Ngram, double> counts;
    const auto len = static_cast<int>(t.size());
    for (int i = 0; i + n <= len; ++i) {
        counts[Ngram(t.begin() + i, t.begin() + i + n)] += 1.0;
    }
    return counts;
}

}  // namespace

// ---- BLEU -----------------------------------------------------------------

void BleuStats::add(const BleuStats& o) {
    if (matches.size() < o.matches.size()) {
        matches.resize(o.matches.size(), 0.0);
        totals.resize(o.totals.size(), 0.0);
    }
    for (std::size_t i = 0; i < o.matches.size(); ++i) {
        matches[i] += o.matches[i];
        totals[i] += o.totals[i];
    }
    hyp_len += o.hyp_len;
    ref_len += o.ref_len;
}

BleuStats bleu_stats(const Tokens& hyp, std::span<const Tokens> refs, int max_n) {
    if (max_n < 1) throw std::invalid_argument("BLEU order must be >= 1");
    BleuStats s;
    s.matches.assign(static_cast<std::size_t>(max_n), 0.0);
    s.totals.assign(static_cast<std::size_t>(max_n), 0.0);
    s.hyp_len = static_cast<double>(hyp.size());

    bool first = true;
    for (const auto& r : refs) {
        const auto len = static_cast<double>(r.size());
        const double d = std::abs(len - s.hyp_len);
        const double best = std::abs(s.ref_len - s.hyp_len);
        if (first || d < best || (d == best && len < s.ref_len)) s.ref_len = len;
        first = false;
    }

    for (int n = 1; n <= max_n; ++n) {
        const auto hc = ngram_counts(hyp, n);
        std::map<Ngram, double> max_ref;
        for (const auto& r : refs) {
            for (const auto& [g, c] : ngram_counts(r, n)) max_ref[g] = std::max(max_ref[g], c);
        }
        double m = 0;
        for (const auto& [g, c] : hc) {
            if (auto it = max_ref.find(g); it != max_ref.end()) m += std::min(c, it->second);
        }
        s.matches[static_cast<std::size_t>(n - 1)] = m;
        s.totals[static_cast<std::size_t>(n - 1)] = std::max(0.0, s.hyp_len - n + 1);
    }
    return s;
}

double bleu_from_stats(const BleuStats& stats, int n, BleuOptions opts) {
    if (n < 1 || static_cast<std::size_t>(n) > stats.matches.size()) {
        throw std::invalid_argument("BLEU order out of range");
    }
    if (stats.hyp_len <= 0) return 0.0;
    double log_sum = 0;
    for (int k = 1; k <= n; ++k) {
        double m = stats.matches[static_cast<std::size_t>(k - 1)];
        double t = stats.totals[static_cast<std::size_t>(k - 1)];
        if (opts.add_one_smoothing && k >= 2) {
            m += 1;
            t += 1;
        }
        if (m <= 0 || t <= 0) return 0.0;
        log_sum += std::log(m / t);
    }
    const double bp = stats.hyp_len > stats.ref_len ? 1.0 : std::exp(1.0 - stats.ref_len / stats.hyp_len);
    return 100.0 * bp * std::exp(log_sum / n);
}

double bleu_n(const Tokens& hyp, std::span<const Tokens> refs, int n, BleuOptions opts) {
    return bleu_from_stats(bleu_stats(hyp, refs, n), n, opts);
}

double corpus_bleu(std::span<const Tokens> hyps, std::span<const std::vector<Tokens>> refs, int n,
                   BleuOptions opts) {
    if (hyps.size() != refs.size()) throw std::invalid_argument("hypothesis and reference counts differ");
    BleuStats total;
    total.matches.assign(static_cast<std::size_t>(n), 0.0);
    total.totals.assign(static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i < hyps.size(); ++i) total.add(bleu_stats(hyps[i], refs[i], n));
    return bleu_from_stats(total, n, opts);
}

// ---- ROUGE-L ----------------------------------------------------------------

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double rouge_l(const Tokens& hyp, const Tokens& ref, double beta) {
    const auto lcs = static_cast<double>(lcs_length(hyp, ref));
    if (lcs == 0) return 0.0;
    const double p = lcs / static_cast<double>(hyp.size());
    const double r = lcs / static_cast<double>(ref.size());
    const double b2 = beta * beta;
    return 100.0 * (1 + b2) * p * r / (r + b2 * p);
}

// ---- METEOR -----------------------------------------------------------------

MeteorAlignment meteor_align(const Tokens& hyp, const Tokens& ref) {
    std::vector<int> hyp_to_ref(hyp.size(), -1);
    std::vector<bool> ref_used(ref.size(), false);

    const auto stage = [&](const Tokens& h, const Tokens& r) {
        for (std::size_t i = 0; i < h.size(); ++i) {
            if (hyp_to_ref[i] >= 0) continue;
            // Continue the previous hypothesis token's run when possible.
            if (i > 0 && hyp_to_ref[i - 1] >= 0) {
                const auto next = static_cast<std::size_t>(hyp_to_ref[i - 1] + 1);
                if (next < r.size() && !ref_used[next] && r[next] == h[i]) {
                    hyp_to_ref[i] = static_cast<int>(next);
                    ref_used[next] = true;
                    continue;
                }
            }
            for (std::size_t j = 0; j < r.size(); ++j) {
                if (!ref_used[j] && r[j] == h[i]) {
                    hyp_to_ref[i] = static_cast<int>(j);
                    ref_used[j] = true;
                    break;
                }
            }
        }
    };

    stage(hyp, ref);
    Tokens hs, rs;
    hs.reserve(hyp.size());
    rs.reserve(ref.size());
    for (const auto& t : hyp) hs.push_back(porter_stem(t));
    for (const auto& t : ref) rs.push_back(porter_stem(t));
    stage(hs, rs);

    MeteorAlignment a;
    int prev = -2;
    for (std::size_t i = 0; i < hyp.size(); ++i) {
        const int j = hyp_to_ref[i];
        if (j < 0) {
            prev = -2;
            continue;
        }
        ++a.matches;
        if (j != prev + 1 || prev < 0) ++a.chunks;
        prev = j;
    }
    return a;
}

double meteor(const Tokens& hyp, const Tokens& ref, MeteorParams params) {
    const auto a = meteor_align(hyp, ref);
    if (a.matches == 0) return 0.0;
    const double m = static_cast<double>(a.matches);
    const double p = m / static_cast<double>(hyp.size());
    const double r = m / static_cast<double>(ref.size());
    const double fmean = p * r / (params.alpha * p + (1 - params.alpha) * r);
    const double penalty = params.gamma * std::pow(static_cast<double>(a.chunks) / m, params.beta);
    return 100.0 * fmean * (1 - penalty);
}

// ---- CIDEr-D ----------------------------------------------------------------

CiderD::CiderD(std::span<const std::vector<Tokens>> refs, double sigma, int max_n)
    : sigma_(sigma), max_n_(max_n) {
    if (refs.empty()) throw std::invalid_argument("CIDEr needs a non-empty reference corpus");
    log_ref_count_ = std::log(static_cast<double>(refs.size()));
    for (const auto& item : refs) {
        std::set<Ngram> seen;
        for (const auto& r : item) {
            for (int n = 1; n <= max_n_; ++n) {
                for (const auto& [g, c] : ngram_counts(r, n)) seen.insert(g);
            }
        }
        for (const auto& g : seen) doc_freq_[g] += 1.0;
    }
    refs_.reserve(refs.size());
    for (const auto& item : refs) {
        std::vector<Vec> vs;
        for (const auto& r : item) vs.push_back(vectorize(r));
        refs_.push_back(std::move(vs));
    }
}

CiderD::Vec CiderD::vectorize(const Tokens& tokens) const {
    Vec v;
    v.weights.resize(static_cast<std::size_t>(max_n_));
    v.norms.assign(static_cast<std::size_t>(max_n_), 0.0);
    v.length = static_cast<double>(tokens.size());
    for (int n = 1; n <= max_n_; ++n) {
        auto& w = v.weights[static_cast<std::size_t>(n - 1)];
        double sq = 0;
        for (const auto& [g, tf] : ngram_counts(tokens, n)) {
            auto it = doc_freq_.find(g);
            const double df = it == doc_freq_.end() ? 0.0 : it->second;
            const double x = tf * (log_ref_count_ - std::log(std::max(1.0, df)));
            w[g] = x;
            sq += x * x;
        }
        v.norms[static_cast<std::size_t>(n - 1)] = std::sqrt(sq);
    }
    return v;
}

double CiderD::item_score(const Tokens& hyp, std::size_t item) const {
    const auto& refs = refs_.at(item);
    if (refs.empty()) return 0.0;
    const Vec h = vectorize(hyp);
    double total = 0;
    for (const auto& r : refs) {
        const double delta = h.length - r.length;
        const double lp = std::exp(-(delta * delta) / (2 * sigma_ * sigma_));
        for (int n = 0; n < max_n_; ++n) {
            const auto& hw = h.weights[static_cast<std::size_t>(n)];
            const auto& rw = r.weights[static_cast<std::size_t>(n)];
            double dot = 0;
            for (const auto& [g, x] : hw) {
                if (auto it = rw.find(g); it != rw.end()) dot += std::min(x, it->second) * it->second;
            }
            const double denom = h.norms[static_cast<std::size_t>(n)] * r.norms[static_cast<std::size_t>(n)];
            if (denom != 0) dot /= denom;
            total += dot * lp;
        }
    }
    return total / max_n_ / static_cast<double>(refs.size()) * 10.0;
}

std::vector<double> cider_items(std::span<const Tokens> hyps, std::span<const std::vector<Tokens>> refs) {
    if (hyps.empty()) throw std::invalid_argument("CIDEr needs a non-empty corpus");
    if (hyps.size() != refs.size()) throw std::invalid_argument("hypothesis and reference counts differ");
    const CiderD scorer(refs);
    std::vector<double> out;
    out.reserve(hyps.size());
    for (std::size_t i = 0; i < hyps.size(); ++i) out.push_back(scorer.item_score(hyps[i], i));
    return out;
}

double cider(std::span<const Tokens> hyps, std::span<const std::vector<Tokens>> refs) {
    const auto items = cider_items(hyps, refs);
    double sum = 0;
    for (double x : items) sum += x;
    return sum / static_cast<double>(items.size());
}

// ---- accuracy ---------------------------------------------------------------

namespace {

template <typename Gold>
std::map<std::string, const Gold*> index_gold(std::span<const Prediction> preds, std::span<const Gold> gold) {
    std::map<std::string, const Gold*> by_id;
    for (const auto& g : gold) {
        if (!by_id.emplace(g.video_id, &g).second) throw std::invalid_argument("duplicate gold id " + g.video_id);
    }
    if (preds.size() != gold.size()) {
        throw std::invalid_argument("prediction count " + std::to_string(preds.size()) + " differs from gold count " +
                                    std::to_string(gold.size()));
    }
    std::set<std::string> seen;
    for (const auto& p : preds) {
        if (!by_id.count(p.video_id)) throw std::invalid_argument("no gold label for " + p.video_id);
        if (!seen.insert(p.video_id).second) throw std::invalid_argument("duplicate prediction for " + p.video_id);
    }
    return by_id;
}

}  // namespace

double top1_accuracy(std::span<const Prediction> preds, std::span<const GoldLabel> gold) {
    const auto by_id = index_gold(preds, gold);
    if (preds.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& p : preds) {
        if (p.label && *p.label == by_id.at(p.video_id)->label) ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(preds.size());
}

double multilabel_hit_accuracy(std::span<const Prediction> preds, std::span<const GoldLabelSet> gold) {
    for (const auto& g : gold) {
        if (g.labels.empty()) throw std::invalid_argument("empty gold label set for " + g.video_id);
    }
    const auto by_id = index_gold(preds, gold);
    if (preds.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& p : preds) {
        if (p.label && by_id.at(p.video_id)->labels.count(*p.label)) ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(preds.size());
}

// ---- reports ----------------------------------------------------------------

MetricReport generation_report(std::string title, std::span<const std::string> video_ids,
                               std::span<const std::string> hyps,
                               std::span<const std::vector<std::string>> refs) {
    if (video_ids.size() != hyps.size() || hyps.size() != refs.size()) {
        throw std::invalid_argument("ids, hypotheses and references must align");
    }
    if (hyps.empty()) throw std::invalid_argument("empty evaluation corpus");
    std::vector<Tokens> h;
    std::vector<std::vector<Tokens>> r;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
        h.push_back(tokenize(hyps[i]));
        std::vector<Tokens> item;
        for (const auto& s : refs[i]) item.push_back(tokenize(s));
        if (item.empty()) throw std::invalid_argument("no references for " + video_ids[i]);
        r.push_back(std::move(item));
    }

    MetricReport rep;
    rep.title = std::move(title);
    rep.n_items = hyps.size();
    const auto cider_scores = cider_items(h, r);
    double meteor_sum = 0, rouge_sum = 0, cider_sum = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        ItemScores item{video_ids[i], {}};
        double best_meteor = 0, best_rouge = 0;
        for (const auto& ref : r[i]) {
            best_meteor = std::max(best_meteor, meteor(h[i], ref));
            best_rouge = std::max(best_rouge, rouge_l(h[i], ref));
        }
        item.scores["METEOR"] = best_meteor;
        item.scores["ROUGE-L"] = best_rouge;
        item.scores["CIDEr"] = cider_scores[i] * 10.0;
        const auto stats = bleu_stats(h[i], r[i], 4);
        for (int n = 1; n <= 4; ++n) item.scores["BLEU-" + std::to_string(n)] = bleu_from_stats(stats, n);
        meteor_sum += best_meteor;
        rouge_sum += best_rouge;
        cider_sum += cider_scores[i] * 10.0;
        rep.items.push_back(std::move(item));
    }
    const double n = static_cast<double>(h.size());
    rep.corpus["METEOR"] = meteor_sum / n;
    rep.corpus["ROUGE-L"] = rouge_sum / n;
    rep.corpus["CIDEr"] = cider_sum / n;
    for (int k = 1; k <= 4; ++k) rep.corpus["BLEU-" + std::to_string(k)] = corpus_bleu(h, r, k);
    return rep;
}

std::string format_report(const std::vector<MetricReport>& reports) {
    std::vector<std::string> columns;
    for (auto c : kGenerationColumns) {
        const bool used = std::any_of(reports.begin(), reports.end(),
                                      [&](const MetricReport& r) { return r.corpus.count(std::string(c)); });
        if (used) columns.emplace_back(c);
    }
    std::set<std::string> rest;
    for (const auto& r : reports) {
        for (const auto& [k, v] : r.corpus) {
            if (std::find(columns.begin(), columns.end(), k) == columns.end()) rest.insert(k);
        }
    }
    columns.insert(columns.end(), rest.begin(), rest.end());

    std::size_t first = 4;
    for (const auto& r : reports) first = std::max(first, r.title.size());
    std::vector<std::size_t> widths;
    for (const auto& c : columns) widths.push_back(std::max<std::size_t>(c.size(), 6));

    std::string out;
    const auto pad = [&](const std::string& s, std::size_t w, bool left) {
        std::string cell = s;
        if (cell.size() < w) cell.insert(left ? cell.size() : 0, w - cell.size(), ' ');
        return cell;
    };
    out += pad("task", first, true);
    out += "  " + pad("n", 5, false);
    for (std::size_t i = 0; i < columns.size(); ++i) out += "  " + pad(columns[i], widths[i], false);
    out += '\n';
    for (const auto& r : reports) {
        out += pad(r.title, first, true);
        out += "  " + pad(std::to_string(r.n_items), 5, false);
        for (std::size_t i = 0; i < columns.size(); ++i) {
            std::string cell = "-";
            if (auto it = r.corpus.find(columns[i]); it != r.corpus.end()) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.2f", it->second);
                cell = buf;
            }
            out += "  " + pad(cell, widths[i], false);
        }
        out += '\n';
    }
    return out;
}

nlohmann::json report_to_json(const MetricReport& report) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& it : report.items) items.push_back({{"video_id", it.video_id}, {"scores", it.scores}});
    return {{"title", report.title}, {"n_items", report.n_items}, {"corpus", report.corpus}, {"items", items}};
}

}  // namespace storyverb
