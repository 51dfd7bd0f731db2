#include "hoprag/token_signals.hpp"

#include <algorithm>
#include <cmath>

#include "hoprag/error.hpp"

namespace hoprag {

namespace {
constexpr double kDistributionTolerance = 1e-6;
}

void TriggerConfig::validate() const {
    if (alpha < 0.0 || beta < 0.0) throw ConfigError("trigger alpha and beta must be non-negative");
    if (mode == TriggerMode::Dynamic && alpha + beta <= 0.0)
        throw ConfigError("dynamic trigger needs alpha + beta > 0");
}

double token_entropy(std::span<const double> dist) {
    if (dist.empty()) throw InvalidDistribution("empty probability vector");
    double total = 0.0;
    for (double p : dist) {
        if (!(p >= 0.0)) throw InvalidDistribution("negative or NaN probability");
        total += p;
    }
    if (std::abs(total - 1.0) > kDistributionTolerance)
        throw InvalidDistribution("probabilities sum to " + std::to_string(total));

    double h = 0.0;
    for (double p : dist)
        if (p > 0.0) h -= p * std::log(p);
    return std::max(h, 0.0);
}

double max_attention(std::span<const double> weights) {
    double best = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0 && w <= 1.0))
            throw InvalidWeight("attention weight " + std::to_string(w) + " outside [0,1]");
        best = std::max(best, w);
    }
    return best;
}

double rind_score(const TokenEvent& event, const TriggerConfig& cfg) {
    return cfg.alpha * event.entropy + cfg.beta * event.max_attn;
}

double dynamic_threshold(std::span<const TokenEvent> events, const TriggerConfig& cfg) {
    if (events.empty()) throw EmptySegment();
    double entropy_sum = 0.0;
    double attn_sum = 0.0;
    auto [h_lo, h_hi] = std::pair{events.front().entropy, events.front().entropy};
    auto [a_lo, a_hi] = std::pair{events.front().max_attn, events.front().max_attn};
    for (const auto& e : events) {
        entropy_sum += e.entropy;
        attn_sum += e.max_attn;
        h_lo = std::min(h_lo, e.entropy);
        h_hi = std::max(h_hi, e.entropy);
        a_lo = std::min(a_lo, e.max_attn);
        a_hi = std::max(a_hi, e.max_attn);
    }
    // Rounding can push a sum/n mean outside [min, max]; a uniform segment
    // must reproduce its own score exactly.
    const auto n = static_cast<double>(events.size());
    const double mean_h = std::clamp(entropy_sum / n, h_lo, h_hi);
    const double mean_a = std::clamp(attn_sum / n, a_lo, a_hi);
    return cfg.alpha * mean_h + cfg.beta * mean_a;
}

TriggerDecision should_retrieve(std::span<const TokenEvent> events, const TriggerConfig& cfg) {
    if (events.empty()) throw EmptySegment();

    TriggerDecision d;
    d.threshold_used =
        cfg.mode == TriggerMode::Dynamic ? dynamic_threshold(events, cfg) : cfg.fixed_threshold;
    d.max_score = rind_score(events.front(), cfg);
    for (std::size_t i = 0; i < events.size(); ++i) {
        double score = rind_score(events[i], cfg);
        d.max_score = std::max(d.max_score, score);
        if (!d.token_index && score > d.threshold_used) d.token_index = i;
    }
    d.triggered = d.token_index.has_value();
    return d;
}

void validate_events(std::span<const TokenEvent> events) {
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.index != i)
            throw DataError("token index " + std::to_string(e.index) + " at position " +
                            std::to_string(i));
        if (!(e.entropy >= 0.0) || !std::isfinite(e.entropy))
            throw DataError("token " + std::to_string(i) + ": entropy must be >= 0");
        if (!(e.max_attn >= 0.0 && e.max_attn <= 1.0))
            throw DataError("token " + std::to_string(i) + ": max_attn outside [0,1]");
    }
}

} // namespace hoprag
