#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kgxrec::text {

// Lowercased word tokens: split on whitespace, strip punctuation at the token
// boundaries, drop tokens that end up empty. Interior punctuation survives, so
// "J.K. Rowling" -> {"j.k", "rowling"}.
std::vector<std::string> word_tokens(std::string_view s);

std::string to_lower(std::string_view s);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

// Sentence segments: split after '.', '!' or '?' followed by whitespace or end
// of input. Delimiters stay with their sentence; surrounding space is trimmed.
std::vector<std::string> split_sentences(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

std::string trim(std::string_view s);

uint64_t fnv1a(std::string_view s, uint64_t seed = 1469598103934665603ull);

}  // namespace kgxrec::text
