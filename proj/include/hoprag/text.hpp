#pragma once

#include <string>
#include <string_view>
#include <vector>

// Unicode-aware string helpers shared by the tokenizer, entity keys and
// answer normalization. All strings are UTF-8; invalid sequences are treated
// as separators.
namespace hoprag::text {

/// Simple (one-to-one) Unicode case folding.
std::string case_fold(std::string_view s);

/// Trim and collapse every run of Unicode whitespace into a single ASCII space.
std::string normalize_whitespace(std::string_view s);

/// case_fold + normalize_whitespace; the key used for entity/memory dedup.
std::string entity_key(std::string_view s);

std::string trim(std::string_view s);

/// Drops ASCII punctuation/symbols and every Unicode punctuation code point.
std::string strip_punctuation(std::string_view s);

/// Case-folded maximal runs of alphanumeric code points.
std::vector<std::string> alnum_terms(std::string_view s);

/// A folded, whitespace-collapsed view of a string that remembers, for every
/// byte of the folded form, the byte offset in the original it came from.
struct FoldedText {
    std::string folded;
    std::vector<std::size_t> origin;     // start of the source code point (or whitespace run)
    std::vector<std::size_t> origin_end; // exclusive end of the same source range
};

FoldedText fold_with_offsets(std::string_view s);

} // namespace hoprag::text
