#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "storyverb/signals.hpp"
#include "storyverb/video.hpp"

namespace storyverb {

// Numbered cue list: sequence number, `HH:MM:SS,mmm --> HH:MM:SS,mmm`, text
// lines, blank separator. Throws ParseError naming the offending line.
Transcript parse_srt(std::string_view text, const std::string& source = "<srt>");

// JSON array of {start, dur, text}.
Transcript parse_transcript_json(std::string_view text, const std::string& source = "<json>");

// Format picked by extension (.srt / .json). Missing file -> nullopt.
std::optional<Transcript> load_transcript(const VideoAsset& video,
                                          const std::optional<std::filesystem::path>& source);

}  // namespace storyverb
