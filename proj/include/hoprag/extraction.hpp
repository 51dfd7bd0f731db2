#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hoprag/llm_gateway.hpp"

namespace hoprag {

/// Half-open token range [start, end) inside the segment an entity came from.
struct TokenSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct CandidateEntity {
    std::string surface;
    std::optional<std::string> relation;
    std::optional<TokenSpan> span;
    std::optional<double> confidence;

    friend bool operator==(const CandidateEntity&, const CandidateEntity&) = default;
};

/// Prompt templates with `{name}` placeholders. The defaults are compiled in
/// and mirrored by the files under prompts/.
struct PromptTemplates {
    std::string extraction; ///< {question}, {context}
    std::string validation; ///< {question}, {reasoning}, {entities}
    std::string synthesis;  ///< {question}, {memory}

    static PromptTemplates defaults();

    /// Reads extraction.txt, validation.txt and synthesis.txt from `dir`;
    /// missing files keep the compiled default.
    static PromptTemplates load(const std::filesystem::path& dir);
};

extern const std::string_view kExtractionTemplate;
extern const std::string_view kValidationTemplate;
extern const std::string_view kSynthesisTemplate;

/// Replaces every `{key}` with its value; unknown placeholders are left alone.
std::string fill_template(std::string_view tmpl,
                          std::initializer_list<std::pair<std::string_view, std::string_view>> values);

/// The context slot becomes "Context:\n<context>\n\n", or nothing when empty.
std::string build_extraction_prompt(std::string_view question, std::string_view context,
                                    const PromptTemplates& templates = PromptTemplates::defaults());

struct ExtractionResult {
    std::vector<CandidateEntity> entities;
    std::size_t skipped_lines = 0; ///< non-blank lines not in the ENTITY grammar
};

/// Parses `ENTITY: <surface> | RELATION: <relation>` lines (relation optional),
/// keeping the first occurrence of each case-folded surface.
ExtractionResult parse_extraction_output(std::string_view text);

/// Inverse of parse_extraction_output for span-free entities.
std::string format_entities(std::span<const CandidateEntity> entities);

/// Gives each entity the token span covering the first case-insensitive,
/// whitespace-normalized occurrence of its surface in the segment text.
std::vector<CandidateEntity> align_spans(std::vector<CandidateEntity> entities,
                                         const GenerationSegment& segment);

enum class Verdict { Keep, Drop };

struct CotVerdicts {
    std::vector<Verdict> verdicts; ///< one per entity
    std::size_t ignored = 0;       ///< verdict lines naming entities out of range
};

/// Parses `KEEP: <n>` / `DROP: <n>` lines (1-based). Entities without a
/// verdict are kept; the first verdict for an entity wins.
CotVerdicts parse_verdicts(std::string_view text, std::size_t entity_count);

std::string build_validation_prompt(std::string_view question, std::string_view reasoning,
                                    std::span<const CandidateEntity> entities,
                                    const PromptTemplates& templates = PromptTemplates::defaults());

/// Asks the provider which entities stay consistent with the question and
/// the reasoning so far. Issues exactly one generation call.
CotVerdicts cot_validate(std::span<const CandidateEntity> entities, std::string_view question,
                         std::string_view reasoning, Provider& provider,
                         const PromptTemplates& templates = PromptTemplates::defaults(),
                         std::size_t max_tokens = 256);

} // namespace hoprag
