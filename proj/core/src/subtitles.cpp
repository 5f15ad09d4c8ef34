#include "storyverb/subtitles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "storyverb/errors.hpp"
#include "storyverb/text.hpp"

namespace storyverb {

namespace {

struct Line {
    std::size_t number;
    std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    std::vector<Line> lines;
    std::size_t n = 1;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back({n++, line});
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
    return lines;
}

// HH:MM:SS,mmm (or with '.'); hours may exceed two digits.
bool parse_timestamp(std::string_view s, double& out) {
    s = trim(s);
    long parts[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i) {
        std::size_t k = 0;
        long v = 0;
        while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) v = v * 10 + (s[k++] - '0');
        if (k == 0) return false;
        parts[i] = v;
        s.remove_prefix(k);
        if (i < 2) {
            if (s.empty() || s.front() != ':') return false;
            s.remove_prefix(1);
        }
    }
    double frac = 0.0;
    if (!s.empty()) {
        if (s.front() != ',' && s.front() != '.') return false;
        s.remove_prefix(1);
        if (s.empty()) return false;
        double scale = 0.1;
        for (char c : s) {
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
            frac += (c - '0') * scale;
            scale /= 10;
        }
    }
    if (parts[1] > 59 || parts[2] > 59) return false;
    out = parts[0] * 3600.0 + parts[1] * 60.0 + parts[2] + frac;
    return true;
}

void finish(Transcript& t) {
    std::stable_sort(t.segments.begin(), t.segments.end(),
                     [](const TranscriptSegment& a, const TranscriptSegment& b) { return a.start_s < b.start_s; });
}

}  // namespace

Transcript parse_srt(std::string_view text, const std::string& source) {
    Transcript t;
    const auto lines = split_lines(text);
    std::size_t i = 0;
    while (i < lines.size()) {
        if (trim(lines[i].text).empty()) {
            ++i;
            continue;
        }
        const Line& seq = lines[i];
        const auto seq_text = trim(seq.text);
        if (!std::all_of(seq_text.begin(), seq_text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            throw ParseError(source, seq.number, "expected cue sequence number");
        if (++i >= lines.size()) throw ParseError(source, seq.number, "cue without timing line");
        const Line& timing = lines[i];
        const auto arrow = timing.text.find("-->");
        double start = 0, end = 0;
        if (arrow == std::string_view::npos || !parse_timestamp(timing.text.substr(0, arrow), start)) {
            throw ParseError(source, timing.number, "malformed cue timing");
        }
        // Position settings may trail the end time.
        auto rest = trim(timing.text.substr(arrow + 3));
        rest = rest.substr(0, rest.find(' '));
        if (!parse_timestamp(rest, end)) throw ParseError(source, timing.number, "malformed cue timing");
        if (end < start) throw ParseError(source, timing.number, "cue ends before it starts");
        ++i;
        std::vector<std::string> body;
        while (i < lines.size() && !trim(lines[i].text).empty()) body.emplace_back(trim(lines[i++].text));
        t.segments.push_back({start, end - start, join(body, " ")});
    }
    finish(t);
    return t;
}

Transcript parse_transcript_json(std::string_view text, const std::string& source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(source, 0, e.what());
    }
    if (!j.is_array()) throw ParseError(source, 0, "expected an array of cues");
    Transcript t;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const auto& cue = j[k];
        const std::string where = "cue " + std::to_string(k + 1);
        if (!cue.is_object() || !cue.contains("start") || !cue.contains("dur") || !cue.contains("text") ||
            !cue["start"].is_number() || !cue["dur"].is_number() || !cue["text"].is_string()) {
            throw ParseError(source, k + 1, where + ": expected {start, dur, text}");
        }
        const double start = cue["start"].get<double>();
        const double dur = cue["dur"].get<double>();
        if (!std::isfinite(start) || start < 0) throw ParseError(source, k + 1, where + ": negative start");
        if (!std::isfinite(dur) || dur < 0) throw ParseError(source, k + 1, where + ": negative duration");
        t.segments.push_back({start, dur, std::string(trim(cue["text"].get<std::string>()))});
    }
    finish(t);
    return t;
}

std::optional<Transcript> load_transcript(const VideoAsset& video,
                                          const std::optional<std::filesystem::path>& source) {
    (void)video;
    if (!source || !std::filesystem::exists(*source)) return std::nullopt;
    const std::string text = read_file(source->string());
    if (source->extension() == ".json") return parse_transcript_json(text, source->string());
    return parse_srt(text, source->string());
}

}  // namespace storyverb
