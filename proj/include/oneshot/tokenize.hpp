#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace oneshot {

struct NormConfig {
    bool lowercase = true;
    bool strip_accents = false;
    bool collapse_whitespace = true;
};

// Normalization operates on Unicode scalar values. Lowercasing and accent
// stripping cover ASCII plus the Latin-1 / Latin Extended-A letters; other
// scripts pass through unchanged. collapse_whitespace maps runs of Unicode
// whitespace to a single ' ' and trims the ends. Idempotent.
std::string normalize(const std::string& text, const NormConfig& cfg);

// Maximal runs of two or more alphanumeric scalar values in the normalized
// text, in order. Single-character tokens are dropped.
std::vector<std::string> word_tokenize(const std::string& text, const NormConfig& cfg);

// Contiguous windows of n scalar values for every n in [n_min, n_max],
// enumerated by n then by position, over the normalized text (whitespace
// collapsed to single spaces). Duplicates retained. Requires
// 1 <= n_min <= n_max <= 8.
std::vector<std::string> char_ngrams(const std::string& text, int n_min, int n_max,
                                     const NormConfig& cfg);

namespace unicode {
// Decodes UTF-8 to scalar values; invalid bytes decode as U+FFFD.
std::vector<std::uint32_t> decode_utf8(const std::string& text);
void append_utf8(std::string& out, std::uint32_t cp);
}  // namespace unicode

}  // namespace oneshot
