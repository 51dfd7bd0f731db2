#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "hoprag/extraction.hpp"
#include "hoprag/token_signals.hpp"

namespace hoprag {

enum class FilterMode { NoFilter, CoT, Conf, CoTConf };

std::string_view to_string(FilterMode m);
FilterMode filter_mode_from_string(std::string_view s);

struct TopK {
    std::size_t k = 5;
};

/// Keeps entities with confidence strictly above `tau`.
struct Threshold {
    double tau = 0.0;
};

using Selection = std::variant<TopK, Threshold>;

struct FilterConfig {
    FilterMode mode = FilterMode::CoTConf;
    double gamma = 1.0;
    double delta = 0.2;
    Selection selection = TopK{5};

    bool needs_verdicts() const noexcept { return mode == FilterMode::CoT || mode == FilterMode::CoTConf; }
    bool scores() const noexcept { return mode == FilterMode::Conf || mode == FilterMode::CoTConf; }

    void validate() const;
};

/// max over the span of gamma / (1 + entropy) + delta * max_attn.
/// Throws MissingSpan without a span and DataError if the span leaves `events`.
double entity_confidence(const CandidateEntity& entity, std::span<const TokenEvent> events,
                         const FilterConfig& cfg);

struct FilterOutcome {
    std::vector<CandidateEntity> kept;
    std::size_t unscored = 0; ///< spanless entities dropped by a confidence pass
};

/// Applies the configured mode. CoT modes require one verdict per entity
/// (ConfigError otherwise). Confidence passes fill `confidence` and return
/// survivors in descending confidence, ties by input order.
FilterOutcome filter_entities(std::span<const CandidateEntity> entities,
                              std::span<const TokenEvent> events, const FilterConfig& cfg,
                              const std::optional<CotVerdicts>& verdicts = std::nullopt);

/// The confidence pass alone (score + select), independent of the mode.
FilterOutcome confidence_select(std::span<const CandidateEntity> entities,
                                std::span<const TokenEvent> events, const FilterConfig& cfg);

/// The chain-of-thought pass alone: keep-verdict entities in input order.
std::vector<CandidateEntity> cot_select(std::span<const CandidateEntity> entities,
                                        const CotVerdicts& verdicts);

} // namespace hoprag
