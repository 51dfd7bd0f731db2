#include "hoprag/filtering.hpp"

#include <algorithm>
#include <numeric>

#include "hoprag/error.hpp"

namespace hoprag {

std::string_view to_string(FilterMode m) {
    switch (m) {
    case FilterMode::NoFilter: return "nofilter";
    case FilterMode::CoT: return "cot";
    case FilterMode::Conf: return "conf";
    case FilterMode::CoTConf: return "cotconf";
    }
    return "nofilter";
}

FilterMode filter_mode_from_string(std::string_view s) {
    if (s == "nofilter") return FilterMode::NoFilter;
    if (s == "cot") return FilterMode::CoT;
    if (s == "conf") return FilterMode::Conf;
    if (s == "cotconf") return FilterMode::CoTConf;
    throw ConfigError("unknown filter mode '" + std::string(s) + "'");
}

void FilterConfig::validate() const {
    if (gamma < 0.0 || delta < 0.0) throw ConfigError("gamma and delta must be non-negative");
    if (auto* top = std::get_if<TopK>(&selection); top && top->k == 0)
        throw ConfigError("top-k selection needs k >= 1");
}

double entity_confidence(const CandidateEntity& entity, std::span<const TokenEvent> events,
                         const FilterConfig& cfg) {
    if (!entity.span) throw MissingSpan(entity.surface);
    const auto [start, end] = *entity.span;
    if (start >= end || end > events.size())
        throw DataError("span of '" + entity.surface + "' lies outside the segment");

    double best = 0.0;
    for (std::size_t t = start; t < end; ++t) {
        double v = cfg.gamma / (1.0 + events[t].entropy) + cfg.delta * events[t].max_attn;
        best = t == start ? v : std::max(best, v);
    }
    return best;
}

std::vector<CandidateEntity> cot_select(std::span<const CandidateEntity> entities,
                                        const CotVerdicts& verdicts) {
    std::vector<CandidateEntity> kept;
    for (std::size_t i = 0; i < entities.size(); ++i)
        if (verdicts.verdicts[i] == Verdict::Keep) kept.push_back(entities[i]);
    return kept;
}

FilterOutcome confidence_select(std::span<const CandidateEntity> entities,
                                std::span<const TokenEvent> events, const FilterConfig& cfg) {
    FilterOutcome out;
    std::vector<CandidateEntity> scored;
    for (const auto& e : entities) {
        if (!e.span) {
            ++out.unscored;
            continue;
        }
        auto copy = e;
        copy.confidence = entity_confidence(e, events, cfg);
        scored.push_back(std::move(copy));
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return *a.confidence > *b.confidence; });

    if (auto* top = std::get_if<TopK>(&cfg.selection)) {
        if (scored.size() > top->k) scored.resize(top->k);
    } else {
        const double tau = std::get<Threshold>(cfg.selection).tau;
        std::erase_if(scored, [tau](const auto& e) { return !(*e.confidence > tau); });
    }
    out.kept = std::move(scored);
    return out;
}

FilterOutcome filter_entities(std::span<const CandidateEntity> entities,
                              std::span<const TokenEvent> events, const FilterConfig& cfg,
                              const std::optional<CotVerdicts>& verdicts) {
    if (cfg.needs_verdicts()) {
        if (!verdicts)
            throw ConfigError("filter mode '" + std::string(to_string(cfg.mode)) + "' needs CoT verdicts");
        if (verdicts->verdicts.size() != entities.size())
            throw ConfigError("CoT verdict count does not match entity count");
    }

    switch (cfg.mode) {
    case FilterMode::NoFilter:
        return {std::vector<CandidateEntity>(entities.begin(), entities.end()), 0};
    case FilterMode::CoT:
        return {cot_select(entities, *verdicts), 0};
    case FilterMode::Conf:
        return confidence_select(entities, events, cfg);
    case FilterMode::CoTConf: {
        auto survivors = cot_select(entities, *verdicts);
        return confidence_select(survivors, events, cfg);
    }
    }
    return {};
}

} // namespace hoprag
