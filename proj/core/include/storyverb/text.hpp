#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace storyverb {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Bytes >= 0x80 count as word characters so UTF-8 text survives.
bool is_word_char(unsigned char c);

// Maximal runs of word characters, lowercased.
std::vector<std::string> word_tokens(std::string_view s);

std::string read_file(const std::string& path);
// Writes via a temporary file and rename.
void write_file_atomic(const std::string& path, std::string_view data);

}  // namespace storyverb
