#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

// Per-token uncertainty signals and the retrieval trigger.
//
// A token's trigger score is alpha * entropy + beta * max_attn. In dynamic
// mode the threshold is the same weighted combination of the segment means,
// so a segment triggers only when some token stands out from the segment
// average; in fixed mode the threshold is a constant.
namespace hoprag {

/// One generated token with its uncertainty signals.
struct TokenEvent {
    std::size_t index = 0; ///< 0-based position in its segment
    std::string text;
    double entropy = 0.0;  ///< nats, >= 0
    double max_attn = 0.0; ///< max attention any later token pays this one, in [0,1]

    friend bool operator==(const TokenEvent&, const TokenEvent&) = default;
};

enum class TriggerMode { Dynamic, Fixed };

struct TriggerConfig {
    TriggerMode mode = TriggerMode::Dynamic;
    double alpha = 1.0;
    double beta = 1.0;
    double fixed_threshold = 0.6;

    /// Throws ConfigError on negative weights or alpha + beta == 0 in dynamic mode.
    void validate() const;
};

struct TriggerDecision {
    bool triggered = false;
    std::optional<std::size_t> token_index; ///< first token scoring above the threshold
    double threshold_used = 0.0;
    double max_score = 0.0;
};

/// Shannon entropy in nats. The distribution must be non-empty, non-negative
/// and sum to 1 within 1e-6; otherwise InvalidDistribution is thrown.
double token_entropy(std::span<const double> dist);

/// Largest attention weight from later tokens; 0 for an empty set.
/// Throws InvalidWeight for values outside [0,1].
double max_attention(std::span<const double> weights);

double rind_score(const TokenEvent& event, const TriggerConfig& cfg);

/// alpha * mean(entropy) + beta * mean(max_attn). Throws EmptySegment.
double dynamic_threshold(std::span<const TokenEvent> events, const TriggerConfig& cfg);

/// Triggers iff some token's score is strictly above the threshold.
TriggerDecision should_retrieve(std::span<const TokenEvent> events, const TriggerConfig& cfg);

/// Throws DataError when an event breaks the TokenEvent invariants or the
/// indices are not 0, 1, 2, ...
void validate_events(std::span<const TokenEvent> events);

} // namespace hoprag
