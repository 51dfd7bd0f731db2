#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hoprag/token_signals.hpp"

namespace hoprag {

struct GenerationRequest {
    std::string prompt;
    std::size_t max_tokens = 256;
    std::vector<std::string> stop_sequences;
};

enum class FinishReason { Stop, Length, TraceEnd };

std::string_view to_string(FinishReason r);
FinishReason finish_reason_from_string(std::string_view s);

struct GenerationSegment {
    std::string text;
    std::vector<TokenEvent> events;
    FinishReason finish_reason = FinishReason::Stop;

    friend bool operator==(const GenerationSegment&, const GenerationSegment&) = default;
};

/// Throws DataError unless the event texts concatenate to `text` and every
/// event satisfies the TokenEvent invariants.
void validate_segment(const GenerationSegment& segment);

/// Generation backend. An instance serves one session at a time.
class Provider {
public:
    virtual ~Provider() = default;
    virtual GenerationSegment generate(const GenerationRequest& request) = 0;
};

struct TraceRecord {
    std::string step_key;
    GenerationSegment segment;
};

using TraceFile = std::vector<TraceRecord>;

nlohmann::ordered_json segment_to_json(const GenerationSegment& segment);
nlohmann::ordered_json trace_record_to_json(const TraceRecord& record);

/// Parses newline-delimited trace records. Blank lines are skipped. Throws
/// ParseError naming the 1-based line, or DuplicateKey.
TraceFile parse_trace(std::string_view content);
TraceFile load_trace(const std::filesystem::path& path);

/// One JSON object per line, LF-terminated.
std::string serialize_trace(const TraceFile& trace);

/// Replays a trace in call order; the request is ignored. Calls beyond the
/// last record throw TraceExhausted.
class TraceProvider final : public Provider {
public:
    explicit TraceProvider(TraceFile trace) : trace_(std::move(trace)) {}

    GenerationSegment generate(const GenerationRequest& request) override;

    std::size_t calls() const noexcept { return next_; }
    std::size_t remaining() const noexcept { return trace_.size() - next_; }

private:
    TraceFile trace_;
    std::size_t next_ = 0;
};

/// Records every request/segment pair of a wrapped provider so a live session
/// can be saved and replayed as a trace.
class RecordingProvider final : public Provider {
public:
    explicit RecordingProvider(Provider& inner) : inner_(inner) {}

    GenerationSegment generate(const GenerationRequest& request) override;

    const TraceFile& recorded() const noexcept { return recorded_; }

private:
    Provider& inner_;
    TraceFile recorded_;
};

} // namespace hoprag
