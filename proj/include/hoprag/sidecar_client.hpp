#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hoprag/llm_gateway.hpp"

// Client for the inference sidecar: POST /generate streams one JSON object per
// generated token followed by a terminal {"finish_reason": ...} record.
//
//   {"index":0,"text":"Par","entropy":1.2,"attn_to_past":{}}
//   {"index":1,"text":"is","entropy":0.3,"attn_to_past":{"0":0.71}}
//   {"finish_reason":"stop"}
//
// attn_to_past holds this step's attention toward earlier generated tokens.
// The client folds it into per-token max_attn: token j receives the maximum
// weight any later step placed on it, or 0 when nothing attends to it.
namespace hoprag {

struct SidecarEvent {
    std::size_t index = 0;
    std::string text;
    double entropy = 0.0;
    std::vector<std::pair<std::size_t, double>> attn_to_past;
};

/// Either an event or the terminal record of a stream.
struct SidecarLine {
    std::optional<SidecarEvent> event;
    std::optional<std::string> finish_reason;
    std::string message;
};

/// Throws ProtocolViolation on malformed records.
SidecarLine parse_sidecar_line(std::string_view line);

/// Folds raw sidecar events into a segment. Throws ProtocolViolation when
/// indices are not contiguous, an attention entry points at a non-earlier
/// token, or a signal is out of range.
GenerationSegment fold_sidecar_events(const std::vector<SidecarEvent>& events, FinishReason reason);

struct SidecarOptions {
    std::chrono::milliseconds connect_timeout{5000};
    std::chrono::milliseconds read_timeout{120000};
    int max_attempts = 3;
    std::chrono::milliseconds retry_backoff{250};
};

class SidecarProvider final : public Provider {
public:
    /// `base_url` like "http://127.0.0.1:8765".
    explicit SidecarProvider(std::string base_url, SidecarOptions options = {});

    GenerationSegment generate(const GenerationRequest& request) override;

    /// GET /health; returns the model id when the sidecar reports ready.
    std::optional<std::string> health() const;

private:
    std::string base_url_;
    SidecarOptions options_;
};

} // namespace hoprag
