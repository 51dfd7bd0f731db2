#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hoprag/error.hpp"
#include "hoprag/extraction.hpp"
#include "hoprag/filtering.hpp"
#include "hoprag/llm_gateway.hpp"
#include "hoprag/memory.hpp"
#include "hoprag/retriever.hpp"
#include "hoprag/token_signals.hpp"

// The multi-hop loop: generate, check the trigger, and on a trigger extract
// and filter entities, build a sub-query, retrieve, and write memory; repeat
// until a segment no longer triggers or the hop budget runs out.
namespace hoprag {

struct PipelineConfig {
    TriggerConfig trigger;
    FilterConfig filter;
    std::size_t retrieval_k = 3;
    std::size_t max_hops = 5;
    std::size_t max_tokens_per_segment = 256;
    std::size_t memory_budget_chars = 2000;
    PromptTemplates prompts = PromptTemplates::defaults();

    void validate() const;
};

nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);

struct HopWarnings {
    std::size_t skipped_lines = 0;    ///< generation lines outside the ENTITY grammar
    std::size_t unscored = 0;         ///< spanless entities dropped by a confidence pass
    std::size_t verdicts_ignored = 0; ///< out-of-range CoT verdicts
};

struct HopRecord {
    std::size_t hop_index = 0;
    GenerationSegment segment;
    TriggerDecision decision;
    std::vector<CandidateEntity> extracted;
    std::vector<CandidateEntity> kept;
    std::optional<std::string> subquery;
    std::vector<ScoredDoc> retrieved;
    std::size_t memory_writes = 0;
    std::size_t memory_size = 0; ///< records in memory after this hop
    HopWarnings warnings;
};

enum class TerminatedBy { NoTrigger, MaxHops, TraceEnd };

std::string_view to_string(TerminatedBy t);

struct HopTrace {
    std::string qid;
    std::string question;
    std::vector<HopRecord> hops;
    std::string final_answer;
    std::size_t total_retrievals = 0;
    TerminatedBy terminated_by = TerminatedBy::NoTrigger;
    MemoryStore memory;
};

/// Stable field order; `dump()` of the result is byte-deterministic.
nlohmann::ordered_json hoptrace_to_json(const HopTrace& trace);

/// A provider or index failure mid-question. Carries the hops completed so far.
class PipelineError : public Error {
public:
    PipelineError(Kind kind, const std::string& what, HopTrace partial)
        : Error(kind, what), partial_(std::move(partial)) {}

    const HopTrace& partial() const noexcept { return partial_; }

private:
    HopTrace partial_;
};

/// Text after a leading "Answer:" on the first line carrying one, trimmed.
std::optional<std::string> find_answer_line(std::string_view text);

/// "Known facts:" block from memory followed by the previous hop's passages.
std::string build_generation_context(std::string_view rendered_memory,
                                     std::span<const ScoredDoc> passages, const InvertedIndex& index);

/// The question verbatim when nothing was kept; otherwise the question, a
/// "Known facts:" block (when memory is non-empty) and a "Find:" line.
std::string form_subquery(std::string_view question, std::span<const CandidateEntity> kept,
                          const MemoryStore& memory, std::size_t memory_budget = 2000);

/// First line of the model's answer with any "Answer:" marker removed. When
/// `last_segment` already states an answer line it is used as is and no call
/// is made; pass nullptr to always ask the provider.
std::string synthesize_answer(std::string_view question, const MemoryStore& memory,
                              const GenerationSegment* last_segment, Provider& provider,
                              const PipelineConfig& cfg = {});

/// Min-max normalized scores within one result list: rank 1 -> 1.0, last -> 0.0.
/// A singleton or an all-equal list maps to 1.0.
std::vector<double> normalized_scores(std::span<const ScoredDoc> results);

HopTrace run_question(std::string_view question, Provider& provider, const InvertedIndex& index,
                      const PipelineConfig& cfg);

} // namespace hoprag
