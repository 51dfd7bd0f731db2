#include "hoprag/orchestrator.hpp"

#include <algorithm>

#include "hoprag/text.hpp"

namespace hoprag {

using nlohmann::ordered_json;

void PipelineConfig::validate() const {
    trigger.validate();
    filter.validate();
    if (retrieval_k < 1) throw ConfigError("retrieval_k must be >= 1");
    if (max_hops < 1) throw ConfigError("max_hops must be >= 1");
    if (max_tokens_per_segment < 1) throw ConfigError("max_tokens_per_segment must be >= 1");
    if (memory_budget_chars < 1) throw ConfigError("memory_budget_chars must be >= 1");
}

ordered_json config_to_json(const PipelineConfig& cfg) {
    ordered_json trigger{{"mode", cfg.trigger.mode == TriggerMode::Dynamic ? "dynamic" : "fixed"},
                         {"alpha", cfg.trigger.alpha},
                         {"beta", cfg.trigger.beta},
                         {"fixed_threshold", cfg.trigger.fixed_threshold}};
    ordered_json selection;
    if (auto* top = std::get_if<TopK>(&cfg.filter.selection))
        selection = {{"top_k", top->k}};
    else
        selection = {{"threshold", std::get<Threshold>(cfg.filter.selection).tau}};
    ordered_json filter{{"mode", to_string(cfg.filter.mode)},
                        {"gamma", cfg.filter.gamma},
                        {"delta", cfg.filter.delta},
                        {"selection", std::move(selection)}};
    return ordered_json{{"trigger", std::move(trigger)},
                        {"filter", std::move(filter)},
                        {"retrieval_k", cfg.retrieval_k},
                        {"max_hops", cfg.max_hops},
                        {"max_tokens_per_segment", cfg.max_tokens_per_segment},
                        {"memory_budget_chars", cfg.memory_budget_chars}};
}

std::string_view to_string(TerminatedBy t) {
    switch (t) {
    case TerminatedBy::NoTrigger: return "no_trigger";
    case TerminatedBy::MaxHops: return "max_hops";
    case TerminatedBy::TraceEnd: return "trace_end";
    }
    return "no_trigger";
}

namespace {

ordered_json entity_to_json(const CandidateEntity& e) {
    ordered_json j{{"surface", e.surface}};
    j["relation"] = e.relation ? ordered_json(*e.relation) : ordered_json(nullptr);
    j["span"] = e.span ? ordered_json::array({e.span->start, e.span->end}) : ordered_json(nullptr);
    j["confidence"] = e.confidence ? ordered_json(*e.confidence) : ordered_json(nullptr);
    return j;
}

ordered_json entities_to_json(std::span<const CandidateEntity> es) {
    auto arr = ordered_json::array();
    for (const auto& e : es) arr.push_back(entity_to_json(e));
    return arr;
}

ordered_json hop_to_json(const HopRecord& h) {
    ordered_json decision{{"triggered", h.decision.triggered}};
    decision["token_index"] =
        h.decision.token_index ? ordered_json(*h.decision.token_index) : ordered_json(nullptr);
    decision["threshold_used"] = h.decision.threshold_used;
    decision["max_score"] = h.decision.max_score;

    auto retrieved = ordered_json::array();
    for (const auto& d : h.retrieved)
        retrieved.push_back(ordered_json{{"doc_id", d.doc_id}, {"score", d.score}, {"rank", d.rank}});

    ordered_json j{{"hop_index", h.hop_index},
                   {"segment", segment_to_json(h.segment)},
                   {"decision", std::move(decision)},
                   {"extracted", entities_to_json(h.extracted)},
                   {"kept", entities_to_json(h.kept)}};
    j["subquery"] = h.subquery ? ordered_json(*h.subquery) : ordered_json(nullptr);
    j["retrieved"] = std::move(retrieved);
    j["memory_writes"] = h.memory_writes;
    j["memory_size"] = h.memory_size;
    j["warnings"] = ordered_json{{"skipped_lines", h.warnings.skipped_lines},
                                 {"unscored", h.warnings.unscored},
                                 {"verdicts_ignored", h.warnings.verdicts_ignored}};
    return j;
}

} // namespace

ordered_json hoptrace_to_json(const HopTrace& trace) {
    auto hops = ordered_json::array();
    for (const auto& h : trace.hops) hops.push_back(hop_to_json(h));
    return ordered_json{{"qid", trace.qid},
                        {"question", trace.question},
                        {"hops", std::move(hops)},
                        {"final_answer", trace.final_answer},
                        {"total_retrievals", trace.total_retrievals},
                        {"terminated_by", to_string(trace.terminated_by)},
                        {"memory", memory_to_json(trace.memory)}};
}

std::optional<std::string> find_answer_line(std::string_view body) {
    constexpr std::string_view kMarker = "Answer:";
    std::size_t pos = 0;
    while (pos <= body.size()) {
        auto eol = body.find('\n', pos);
        if (eol == std::string_view::npos) eol = body.size();
        auto line = text::trim(body.substr(pos, eol - pos));
        if (std::string_view(line).starts_with(kMarker)) return text::trim(line.substr(kMarker.size()));
        pos = eol + 1;
    }
    return std::nullopt;
}

std::string build_generation_context(std::string_view rendered_memory,
                                     std::span<const ScoredDoc> passages, const InvertedIndex& index) {
    std::string ctx;
    if (!rendered_memory.empty()) {
        ctx += "Known facts:\n";
        ctx += rendered_memory;
    }
    if (!passages.empty()) {
        if (!ctx.empty()) ctx += '\n';
        ctx += "Retrieved passages:\n";
        for (const auto& p : passages) {
            auto ord = index.ordinal(p.doc_id);
            if (!ord) continue;
            const auto& doc = index.document(*ord);
            ctx += "[" + std::to_string(p.rank) + "] " + doc.title + ": " + doc.text + "\n";
        }
    }
    // The extraction template adds its own trailing blank line.
    while (!ctx.empty() && ctx.back() == '\n') ctx.pop_back();
    return ctx;
}

std::string form_subquery(std::string_view question, std::span<const CandidateEntity> kept,
                          const MemoryStore& memory, std::size_t memory_budget) {
    if (kept.empty()) return std::string(question);
    std::string q(question);
    q += '\n';
    auto facts = memory_render(memory, memory_budget);
    if (!facts.empty()) {
        q += "Known facts:\n";
        q += facts;
    }
    q += "Find: ";
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (i) q += "; ";
        q += kept[i].surface;
        if (kept[i].relation) q += " (" + *kept[i].relation + ")";
    }
    return q;
}

namespace {

std::string first_answer_line(std::string_view generated) {
    std::size_t pos = 0;
    while (pos <= generated.size()) {
        auto eol = generated.find('\n', pos);
        if (eol == std::string_view::npos) eol = generated.size();
        auto line = text::trim(generated.substr(pos, eol - pos));
        pos = eol + 1;
        if (line.empty()) continue;
        if (std::string_view(line).starts_with("Answer:")) line = text::trim(line.substr(7));
        return line;
    }
    return {};
}

} // namespace

std::string synthesize_answer(std::string_view question, const MemoryStore& memory,
                              const GenerationSegment* last_segment, Provider& provider,
                              const PipelineConfig& cfg) {
    if (last_segment)
        if (auto stated = find_answer_line(last_segment->text)) return *stated;

    GenerationRequest req;
    req.prompt = fill_template(cfg.prompts.synthesis,
                               {{"question", question},
                                {"memory", memory_render(memory, cfg.memory_budget_chars)}});
    req.max_tokens = cfg.max_tokens_per_segment;
    req.stop_sequences = {"\n"};
    return first_answer_line(provider.generate(req).text);
}

std::vector<double> normalized_scores(std::span<const ScoredDoc> results) {
    std::vector<double> out(results.size(), 1.0);
    if (results.size() < 2) return out;
    auto [lo, hi] = std::minmax_element(results.begin(), results.end(),
                                        [](const auto& a, const auto& b) { return a.score < b.score; });
    const double range = hi->score - lo->score;
    if (range <= 0.0) return out;
    for (std::size_t i = 0; i < results.size(); ++i) out[i] = (results[i].score - lo->score) / range;
    return out;
}

namespace {

double memory_confidence(const CandidateEntity& e, std::span<const TokenEvent> events, const FilterConfig& cfg) {
    if (e.confidence) return *e.confidence;
    if (e.span) return entity_confidence(e, events, cfg);
    return 0.0;
}

// Runs the hop loop, filling `trace` as it goes so a failure leaves the
// completed hops behind.
void run_hops(std::string_view question, Provider& provider, const InvertedIndex& index,
              const PipelineConfig& cfg, HopTrace& trace) {
    std::vector<ScoredDoc> previous;

    for (std::size_t hop = 0; hop < cfg.max_hops; ++hop) {
        GenerationRequest req;
        req.prompt = build_extraction_prompt(
            question,
            build_generation_context(memory_render(trace.memory, cfg.memory_budget_chars), previous, index),
            cfg.prompts);
        req.max_tokens = cfg.max_tokens_per_segment;

        HopRecord rec;
        rec.hop_index = hop;
        try {
            rec.segment = provider.generate(req);
        } catch (const TraceExhausted&) {
            trace.terminated_by = TerminatedBy::TraceEnd;
            if (!trace.hops.empty())
                trace.final_answer = find_answer_line(trace.hops.back().segment.text).value_or("");
            return;
        }
        const auto& events = rec.segment.events;

        if (events.empty()) {
            rec.decision = TriggerDecision{};
        } else {
            rec.decision = should_retrieve(events, cfg.trigger);
        }

        if (!rec.decision.triggered) {
            rec.memory_size = trace.memory.size();
            trace.hops.push_back(std::move(rec));
            trace.terminated_by = TerminatedBy::NoTrigger;
            trace.final_answer =
                synthesize_answer(question, trace.memory, &trace.hops.back().segment, provider, cfg);
            return;
        }

        auto parsed = parse_extraction_output(rec.segment.text);
        rec.warnings.skipped_lines = parsed.skipped_lines;
        rec.extracted = align_spans(std::move(parsed.entities), rec.segment);

        std::optional<CotVerdicts> verdicts;
        if (cfg.filter.needs_verdicts()) {
            if (rec.extracted.empty()) {
                verdicts = CotVerdicts{};
            } else {
                verdicts = cot_validate(rec.extracted, question, rec.segment.text, provider, cfg.prompts,
                                        cfg.max_tokens_per_segment);
                rec.warnings.verdicts_ignored = verdicts->ignored;
            }
        }
        auto outcome = filter_entities(rec.extracted, events, cfg.filter, verdicts);
        rec.kept = std::move(outcome.kept);
        rec.warnings.unscored = outcome.unscored;

        rec.subquery = form_subquery(question, rec.kept, trace.memory, cfg.memory_budget_chars);
        rec.retrieved = index.search(*rec.subquery, cfg.retrieval_k);
        ++trace.total_retrievals;

        for (const auto& e : rec.kept) {
            trace.memory.upsert(make_memory_record(e.surface, e.relation,
                                                   memory_confidence(e, events, cfg.filter), hop,
                                                   MemorySource::Extraction));
            ++rec.memory_writes;
        }
        const auto scores = normalized_scores(rec.retrieved);
        for (std::size_t i = 0; i < rec.retrieved.size(); ++i) {
            const auto& doc = index.document(*index.ordinal(rec.retrieved[i].doc_id));
            const auto& surface = text::trim(doc.title).empty() ? doc.doc_id : doc.title;
            trace.memory.upsert(make_memory_record(surface, std::nullopt, scores[i], hop, MemorySource::Retrieval));
            ++rec.memory_writes;
        }
        rec.memory_size = trace.memory.size();
        previous = rec.retrieved;
        trace.hops.push_back(std::move(rec));
    }

    trace.terminated_by = TerminatedBy::MaxHops;
    try {
        trace.final_answer = synthesize_answer(question, trace.memory, nullptr, provider, cfg);
    } catch (const TraceExhausted&) {
        trace.final_answer = find_answer_line(trace.hops.back().segment.text).value_or("");
    }
}

} // namespace

HopTrace run_question(std::string_view question, Provider& provider, const InvertedIndex& index,
                      const PipelineConfig& cfg) {
    cfg.validate();
    HopTrace trace;
    trace.question = std::string(question);
    try {
        run_hops(question, provider, index, cfg, trace);
    } catch (const Error& e) {
        throw PipelineError(e.kind(), e.what(), std::move(trace));
    }
    return trace;
}

} // namespace hoprag
