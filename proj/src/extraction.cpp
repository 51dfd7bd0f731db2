#include "hoprag/extraction.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "hoprag/text.hpp"

namespace hoprag {

const std::string_view kExtractionTemplate =
    "Extract any names, events, or relationships that might be relevant to answering the "
    "question below.\n"
    "Think step by step. Then list every relevant entity on its own line as\n"
    "ENTITY: <name> | RELATION: <how it relates to the question>\n"
    "The RELATION part is optional. If you are certain of the final answer, finish with a line\n"
    "Answer: <answer>\n"
    "\n"
    "{context}"
    "Question: {question}\n";

const std::string_view kValidationTemplate =
    "Question: {question}\n"
    "\n"
    "Reasoning so far:\n"
    "{reasoning}\n"
    "\n"
    "Candidate entities:\n"
    "{entities}"
    "\n"
    "For each numbered entity decide whether it is logically consistent with the question and "
    "the reasoning above.\n"
    "Reply with one line per entity, either KEEP: <number> or DROP: <number>.\n";

const std::string_view kSynthesisTemplate =
    "Question: {question}\n"
    "\n"
    "Known facts:\n"
    "{memory}"
    "\n"
    "Using the known facts, answer the question concisely on a single line.\n"
    "Answer:";

PromptTemplates PromptTemplates::defaults() {
    return {std::string(kExtractionTemplate), std::string(kValidationTemplate),
            std::string(kSynthesisTemplate)};
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
    auto t = defaults();
    auto read = [&dir](const char* name, std::string& slot) {
        std::ifstream in(dir / name, std::ios::binary);
        if (!in) return;
        std::ostringstream buf;
        buf << in.rdbuf();
        slot = buf.str();
    };
    read("extraction.txt", t.extraction);
    read("validation.txt", t.validation);
    read("synthesis.txt", t.synthesis);
    return t;
}

std::string fill_template(std::string_view tmpl,
                          std::initializer_list<std::pair<std::string_view, std::string_view>> values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i);
            if (close != std::string_view::npos) {
                auto name = tmpl.substr(i + 1, close - i - 1);
                auto it = std::find_if(values.begin(), values.end(),
                                       [name](const auto& kv) { return kv.first == name; });
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

std::string build_extraction_prompt(std::string_view question, std::string_view context,
                                    const PromptTemplates& templates) {
    std::string block;
    if (!context.empty()) {
        block = "Context:\n";
        block += context;
        block += "\n\n";
    }
    return fill_template(templates.extraction, {{"question", question}, {"context", block}});
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        auto line = text.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = eol + 1;
    }
    return lines;
}

bool is_blank(std::string_view s) { return text::trim(s).empty(); }

std::string_view ltrim_ascii(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

// Finds "|" followed by optional blanks and "RELATION:".
std::size_t find_relation_marker(std::string_view body, std::size_t& relation_start) {
    for (std::size_t bar = body.find('|'); bar != std::string_view::npos; bar = body.find('|', bar + 1)) {
        auto rest = ltrim_ascii(body.substr(bar + 1));
        if (rest.starts_with("RELATION:")) {
            relation_start = body.size() - rest.size() + std::string_view("RELATION:").size();
            return bar;
        }
    }
    return std::string_view::npos;
}

} // namespace

ExtractionResult parse_extraction_output(std::string_view output) {
    constexpr std::string_view kTag = "ENTITY:";
    ExtractionResult result;
    std::unordered_set<std::string> seen;

    for (auto line : split_lines(output)) {
        if (is_blank(line)) continue;
        auto body = ltrim_ascii(line);
        if (!body.starts_with(kTag)) {
            ++result.skipped_lines;
            continue;
        }
        body.remove_prefix(kTag.size());

        CandidateEntity entity;
        std::size_t relation_start = 0;
        auto bar = find_relation_marker(body, relation_start);
        if (bar != std::string_view::npos) {
            entity.surface = text::trim(body.substr(0, bar));
            auto relation = text::trim(body.substr(relation_start));
            if (!relation.empty()) entity.relation = std::move(relation);
        } else {
            entity.surface = text::trim(body);
        }
        if (entity.surface.empty()) {
            ++result.skipped_lines;
            continue;
        }
        if (!seen.insert(text::entity_key(entity.surface)).second) continue;
        result.entities.push_back(std::move(entity));
    }
    return result;
}

std::string format_entities(std::span<const CandidateEntity> entities) {
    std::string out;
    for (const auto& e : entities) {
        out += "ENTITY: ";
        out += e.surface;
        if (e.relation) {
            out += " | RELATION: ";
            out += *e.relation;
        }
        out += '\n';
    }
    return out;
}

std::vector<CandidateEntity> align_spans(std::vector<CandidateEntity> entities,
                                         const GenerationSegment& segment) {
    const auto folded = text::fold_with_offsets(segment.text);

    // Byte range of every token in the segment text.
    std::vector<std::size_t> token_begin(segment.events.size());
    std::vector<std::size_t> token_end(segment.events.size());
    std::size_t offset = 0;
    for (std::size_t i = 0; i < segment.events.size(); ++i) {
        token_begin[i] = offset;
        offset += segment.events[i].text.size();
        token_end[i] = offset;
    }

    for (auto& entity : entities) {
        entity.span.reset();
        const auto needle = text::entity_key(entity.surface);
        if (needle.empty()) continue;
        auto pos = folded.folded.find(needle);
        if (pos == std::string::npos) continue;

        const std::size_t lo = folded.origin[pos];
        const std::size_t hi = folded.origin_end[pos + needle.size() - 1];
        std::optional<std::size_t> first;
        std::size_t last = 0;
        for (std::size_t i = 0; i < token_begin.size(); ++i) {
            if (token_begin[i] < hi && token_end[i] > lo) {
                if (!first) first = i;
                last = i;
            }
        }
        if (first) entity.span = TokenSpan{*first, last + 1};
    }
    return entities;
}

CotVerdicts parse_verdicts(std::string_view output, std::size_t entity_count) {
    CotVerdicts result;
    result.verdicts.assign(entity_count, Verdict::Keep);
    std::vector<bool> decided(entity_count, false);

    for (auto line : split_lines(output)) {
        auto body = ltrim_ascii(line);
        Verdict verdict;
        if (body.starts_with("KEEP:"))
            verdict = Verdict::Keep;
        else if (body.starts_with("DROP:"))
            verdict = Verdict::Drop;
        else
            continue;
        auto number = ltrim_ascii(body.substr(5));
        std::size_t n = 0;
        auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), n);
        if (ec != std::errc{} || n == 0 || n > entity_count) {
            ++result.ignored;
            continue;
        }
        if (decided[n - 1]) continue;
        decided[n - 1] = true;
        result.verdicts[n - 1] = verdict;
    }
    return result;
}

std::string build_validation_prompt(std::string_view question, std::string_view reasoning,
                                    std::span<const CandidateEntity> entities,
                                    const PromptTemplates& templates) {
    std::string listing;
    for (std::size_t i = 0; i < entities.size(); ++i) {
        listing += std::to_string(i + 1) + ". " + entities[i].surface;
        if (entities[i].relation) listing += " (" + *entities[i].relation + ")";
        listing += '\n';
    }
    return fill_template(templates.validation,
                         {{"question", question}, {"reasoning", reasoning}, {"entities", listing}});
}

CotVerdicts cot_validate(std::span<const CandidateEntity> entities, std::string_view question,
                         std::string_view reasoning, Provider& provider,
                         const PromptTemplates& templates, std::size_t max_tokens) {
    GenerationRequest req;
    req.prompt = build_validation_prompt(question, reasoning, entities, templates);
    req.max_tokens = max_tokens;
    auto segment = provider.generate(req);
    return parse_verdicts(segment.text, entities.size());
}

} // namespace hoprag
