#include "hoprag/metrics.hpp"

#include <map>
#include <sstream>
#include <vector>

#include "hoprag/error.hpp"
#include "hoprag/text.hpp"

namespace hoprag {

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string w; in >> w;) out.push_back(std::move(w));
    return out;
}

struct Overlap {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

Overlap overlap(const std::string& prediction, const std::string& gold) {
    auto p = split_ws(normalize_answer(prediction));
    auto g = split_ws(normalize_answer(gold));
    if (p.empty() && g.empty()) return {1.0, 1.0, 1.0};
    if (p.empty() || g.empty()) return {};

    std::map<std::string, int> counts;
    for (const auto& t : g) ++counts[t];
    int common = 0;
    for (const auto& t : p)
        if (auto it = counts.find(t); it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    if (common == 0) return {};
    Overlap o;
    o.precision = static_cast<double>(common) / static_cast<double>(p.size());
    o.recall = static_cast<double>(common) / static_cast<double>(g.size());
    o.f1 = 2.0 * o.precision * o.recall / (o.precision + o.recall);
    return o;
}

void require_golds(std::span<const std::string> golds) {
    if (golds.empty()) throw InvalidExample("example has no gold answers");
}

} // namespace

std::string normalize_answer(std::string_view answer) {
    auto s = text::normalize_whitespace(text::strip_punctuation(text::case_fold(answer)));
    std::string out;
    for (const auto& w : split_ws(s)) {
        if (w == "a" || w == "an" || w == "the") continue;
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

int exact_match(std::string_view prediction, std::span<const std::string> golds) {
    require_golds(golds);
    const auto p = normalize_answer(prediction);
    for (const auto& g : golds)
        if (normalize_answer(g) == p) return 1;
    return 0;
}

double token_f1(std::string_view prediction, std::span<const std::string> golds) {
    require_golds(golds);
    double best = 0.0;
    for (const auto& g : golds) best = std::max(best, overlap(std::string(prediction), g).f1);
    return best;
}

double token_precision(std::string_view prediction, std::span<const std::string> golds) {
    require_golds(golds);
    Overlap best{-1.0, 0.0, -1.0};
    for (const auto& g : golds) {
        auto o = overlap(std::string(prediction), g);
        if (o.f1 > best.f1) best = o;
    }
    return best.precision;
}

int yesno_accuracy(std::string_view prediction, std::string_view gold) {
    const auto g = normalize_answer(gold);
    if (g != "yes" && g != "no") throw InvalidExample("yes/no gold is '" + std::string(gold) + "'");
    for (const auto& w : split_ws(normalize_answer(prediction)))
        if (w == "yes" || w == "no") return w == g ? 1 : 0;
    return 0;
}

} // namespace hoprag
