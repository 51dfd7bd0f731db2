#include "hoprag/sidecar_client.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <httplib.h>

#include "hoprag/error.hpp"

namespace hoprag {

SidecarLine parse_sidecar_line(std::string_view line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolViolation(std::string("sidecar sent invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ProtocolViolation("sidecar record is not an object");

    SidecarLine out;
    try {
        if (j.contains("finish_reason")) {
            out.finish_reason = j.at("finish_reason").get<std::string>();
            out.message = j.value("message", "");
            return out;
        }
        SidecarEvent ev;
        ev.index = j.at("index").get<std::size_t>();
        ev.text = j.at("text").get<std::string>();
        ev.entropy = j.at("entropy").get<double>();
        if (auto it = j.find("attn_to_past"); it != j.end()) {
            if (!it->is_object()) throw ProtocolViolation("attn_to_past must be an object");
            for (auto& [key, weight] : it->items()) {
                std::size_t past = 0;
                try {
                    std::size_t used = 0;
                    past = std::stoul(key, &used);
                    if (used != key.size()) throw std::invalid_argument(key);
                } catch (const std::logic_error&) {
                    throw ProtocolViolation("attn_to_past key '" + key + "' is not an index");
                }
                ev.attn_to_past.emplace_back(past, weight.get<double>());
            }
        }
        out.event = std::move(ev);
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolViolation(std::string("malformed sidecar event: ") + e.what());
    }
    return out;
}

GenerationSegment fold_sidecar_events(const std::vector<SidecarEvent>& events, FinishReason reason) {
    GenerationSegment seg;
    seg.finish_reason = reason;
    seg.events.reserve(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& ev = events[i];
        if (ev.index != i)
            throw ProtocolViolation("sidecar event index " + std::to_string(ev.index) +
                                    " out of order (expected " + std::to_string(i) + ")");
        if (!(ev.entropy >= 0.0) || !std::isfinite(ev.entropy))
            throw ProtocolViolation("negative entropy at token " + std::to_string(i));
        seg.events.push_back(TokenEvent{i, ev.text, ev.entropy, 0.0});
        seg.text += ev.text;
    }
    for (const auto& ev : events) {
        for (auto [past, weight] : ev.attn_to_past) {
            if (past >= ev.index)
                throw ProtocolViolation("token " + std::to_string(ev.index) +
                                        " attends to non-earlier token " + std::to_string(past));
            if (!(weight >= 0.0 && weight <= 1.0))
                throw ProtocolViolation("attention weight outside [0,1]");
            auto& target = seg.events[past].max_attn;
            target = std::max(target, weight);
        }
    }
    return seg;
}

SidecarProvider::SidecarProvider(std::string base_url, SidecarOptions options)
    : base_url_(std::move(base_url)), options_(options) {}

namespace {

httplib::Client make_client(const std::string& url, const SidecarOptions& opt) {
    httplib::Client cli(url);
    cli.set_connection_timeout(opt.connect_timeout);
    cli.set_read_timeout(opt.read_timeout);
    return cli;
}

bool retryable(int status) { return status == 429 || status == 503; }

} // namespace

GenerationSegment SidecarProvider::generate(const GenerationRequest& request) {
    if (request.max_tokens < 1) throw InvalidArgument("max_tokens must be >= 1");
    nlohmann::json body{{"prompt", request.prompt},
                        {"max_tokens", request.max_tokens},
                        {"stop", request.stop_sequences}};
    const std::string payload = body.dump();

    for (int attempt = 1;; ++attempt) {
        auto cli = make_client(base_url_, options_);

        int status = 0;
        std::string error_body;
        std::string pending;
        std::vector<SidecarEvent> events;
        std::optional<SidecarLine> terminal;
        std::optional<ProtocolViolation> stream_error;

        auto consume_line = [&](std::string_view line) {
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (line.empty()) return true;
            if (terminal) {
                stream_error.emplace("sidecar sent data after the terminal record");
                return false;
            }
            try {
                auto parsed = parse_sidecar_line(line);
                if (parsed.finish_reason)
                    terminal = std::move(parsed);
                else
                    events.push_back(std::move(*parsed.event));
            } catch (const ProtocolViolation& e) {
                stream_error.emplace(e.what());
                return false;
            }
            return true;
        };

        httplib::Request req;
        req.method = "POST";
        req.path = "/generate";
        req.body = payload;
        req.set_header("Content-Type", "application/json");
        req.set_header("Accept", "application/x-ndjson");
        req.response_handler = [&](const httplib::Response& r) {
            status = r.status;
            return true;
        };
        req.content_receiver = [&](const char* data, std::size_t n, uint64_t, uint64_t) {
            if (status != 200) {
                error_body.append(data, n);
                return true;
            }
            pending.append(data, n);
            std::size_t start = 0;
            for (std::size_t eol; (eol = pending.find('\n', start)) != std::string::npos;) {
                if (!consume_line(std::string_view(pending).substr(start, eol - start))) return false;
                start = eol + 1;
            }
            pending.erase(0, start);
            return true;
        };

        httplib::Response res;
        httplib::Error err = httplib::Error::Success;
        bool ok = cli.send(req, res, err);

        if (stream_error) throw ProtocolViolation(stream_error->what());
        if (!ok && status == 0) {
            if (attempt < options_.max_attempts) {
                std::this_thread::sleep_for(options_.retry_backoff * attempt);
                continue;
            }
            throw BackendUnreachable("sidecar at " + base_url_ + " unreachable: " + httplib::to_string(err));
        }
        if (retryable(status)) {
            if (attempt < options_.max_attempts) {
                std::this_thread::sleep_for(options_.retry_backoff * attempt);
                continue;
            }
            throw BackendUnreachable("sidecar busy (HTTP " + std::to_string(status) + ")");
        }
        if (status != 200)
            throw ProtocolViolation("sidecar returned HTTP " + std::to_string(status) + ": " + error_body);
        if (!ok) throw BackendUnreachable("sidecar stream broke: " + httplib::to_string(err));

        if (!pending.empty() && !consume_line(pending)) throw ProtocolViolation(stream_error->what());
        if (!terminal) throw ProtocolViolation("sidecar stream ended without a terminal record");

        const auto& reason = *terminal->finish_reason;
        if (reason == "error") throw ProviderError("sidecar generation failed: " + terminal->message);
        FinishReason fr;
        if (reason == "stop")
            fr = FinishReason::Stop;
        else if (reason == "length")
            fr = FinishReason::Length;
        else
            throw ProtocolViolation("unknown sidecar finish_reason '" + reason + "'");
        return fold_sidecar_events(events, fr);
    }
}

std::optional<std::string> SidecarProvider::health() const {
    auto cli = make_client(base_url_, options_);
    auto res = cli.Get("/health");
    if (!res || res->status != 200) return std::nullopt;
    try {
        auto j = nlohmann::json::parse(res->body);
        if (j.value("status", "") != "ok") return std::nullopt;
        return j.value("model_id", "");
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

} // namespace hoprag
