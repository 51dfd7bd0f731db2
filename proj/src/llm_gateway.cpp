#include "hoprag/llm_gateway.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "hoprag/error.hpp"

namespace hoprag {

using nlohmann::ordered_json;

std::string_view to_string(FinishReason r) {
    switch (r) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::TraceEnd: return "trace_end";
    }
    return "stop";
}

FinishReason finish_reason_from_string(std::string_view s) {
    if (s == "stop") return FinishReason::Stop;
    if (s == "length") return FinishReason::Length;
    if (s == "trace_end") return FinishReason::TraceEnd;
    throw DataError("unknown finish_reason '" + std::string(s) + "'");
}

void validate_segment(const GenerationSegment& segment) {
    validate_events(segment.events);
    std::string joined;
    joined.reserve(segment.text.size());
    for (const auto& e : segment.events) joined += e.text;
    if (joined != segment.text) throw DataError("event texts do not concatenate to segment text");
}

ordered_json segment_to_json(const GenerationSegment& segment) {
    ordered_json events = ordered_json::array();
    for (const auto& e : segment.events) {
        events.push_back(ordered_json{
            {"index", e.index}, {"text", e.text}, {"entropy", e.entropy}, {"max_attn", e.max_attn}});
    }
    return ordered_json{{"text", segment.text},
                        {"events", std::move(events)},
                        {"finish_reason", to_string(segment.finish_reason)}};
}

ordered_json trace_record_to_json(const TraceRecord& record) {
    ordered_json j{{"step_key", record.step_key}};
    const auto seg = segment_to_json(record.segment);
    for (auto& [k, v] : seg.items()) j[k] = v;
    return j;
}

namespace {

template <typename T>
T require(const nlohmann::json& obj, const char* field, std::size_t line) {
    auto it = obj.find(field);
    if (it == obj.end()) throw ParseError(line, std::string("missing field '") + field + "'");
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError(line, std::string("field '") + field + "' has the wrong type");
    }
}

TraceRecord parse_record(std::string_view raw, std::size_t line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line, "record is not an object");

    TraceRecord rec;
    rec.step_key = require<std::string>(j, "step_key", line);
    rec.segment.text = require<std::string>(j, "text", line);
    auto events = require<nlohmann::json>(j, "events", line);
    if (!events.is_array()) throw ParseError(line, "field 'events' must be an array");
    for (const auto& ev : events) {
        if (!ev.is_object()) throw ParseError(line, "event is not an object");
        TokenEvent t;
        t.index = require<std::size_t>(ev, "index", line);
        t.text = require<std::string>(ev, "text", line);
        t.entropy = require<double>(ev, "entropy", line);
        t.max_attn = require<double>(ev, "max_attn", line);
        rec.segment.events.push_back(std::move(t));
    }
    try {
        rec.segment.finish_reason =
            finish_reason_from_string(require<std::string>(j, "finish_reason", line));
        validate_segment(rec.segment);
    } catch (const ParseError&) {
        throw;
    } catch (const DataError& e) {
        throw ParseError(line, e.what());
    }
    return rec;
}

} // namespace

TraceFile parse_trace(std::string_view content) {
    TraceFile trace;
    std::unordered_set<std::string> keys;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string_view::npos) eol = content.size();
        std::string_view line = content.substr(pos, eol - pos);
        ++line_no;
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        auto rec = parse_record(line, line_no);
        if (!keys.insert(rec.step_key).second) throw DuplicateKey(rec.step_key);
        trace.push_back(std::move(rec));
    }
    return trace;
}

TraceFile load_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open trace file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_trace(buf.str());
}

std::string serialize_trace(const TraceFile& trace) {
    std::string out;
    for (const auto& rec : trace) {
        out += trace_record_to_json(rec).dump();
        out += '\n';
    }
    return out;
}

GenerationSegment TraceProvider::generate(const GenerationRequest&) {
    if (next_ >= trace_.size()) throw TraceExhausted(next_);
    return trace_[next_++].segment;
}

GenerationSegment RecordingProvider::generate(const GenerationRequest& request) {
    auto segment = inner_.generate(request);
    recorded_.push_back({"call-" + std::to_string(recorded_.size() + 1), segment});
    return segment;
}

} // namespace hoprag
