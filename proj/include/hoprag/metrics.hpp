#pragma once

#include <span>
#include <string>
#include <string_view>

// Answer metrics for span and yes/no QA. All comparisons run on normalized
// text: case-folded, punctuation stripped, articles removed, whitespace
// collapsed.
namespace hoprag {

std::string normalize_answer(std::string_view answer);

/// 1 iff the normalized prediction equals some normalized gold.
/// Throws InvalidExample on an empty gold list.
int exact_match(std::string_view prediction, std::span<const std::string> golds);

/// Best token-multiset F1 over the golds.
double token_f1(std::string_view prediction, std::span<const std::string> golds);

/// Token precision against the gold with the best F1.
double token_precision(std::string_view prediction, std::span<const std::string> golds);

/// The first whole-word "yes"/"no" in the prediction against a yes/no gold.
/// Throws InvalidExample when the gold is neither.
int yesno_accuracy(std::string_view prediction, std::string_view gold);

} // namespace hoprag
