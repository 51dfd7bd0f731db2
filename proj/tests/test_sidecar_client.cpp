#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <map>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "hoprag/error.hpp"
#include "hoprag/sidecar_client.hpp"

using namespace hoprag;
using namespace std::chrono_literals;

namespace {

// Minimal sidecar double. Each test sets the response body and status.
class MockSidecar {
public:
    MockSidecar() {
        server_.Post("/generate", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits_;
            last_request_ = nlohmann::json::parse(req.body);
            int status = statuses_.empty() ? 200 : statuses_.front();
            if (!statuses_.empty()) statuses_.erase(statuses_.begin());
            res.status = status;
            res.set_content(status == 200 ? body_ : R"({"error":"nope"})", "application/x-ndjson");
        });
        server_.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
            res.set_content(health_, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockSidecar() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    void body(std::string b) { body_ = std::move(b); }
    void statuses(std::vector<int> s) { statuses_ = std::move(s); }
    void health(std::string h) { health_ = std::move(h); }
    int hits() const { return hits_; }
    const nlohmann::json& last_request() const { return last_request_; }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::string body_;
    std::vector<int> statuses_;
    std::string health_ = R"({"status":"ok","model_id":"mock-7b"})";
    std::atomic<int> hits_{0};
    nlohmann::json last_request_;
};

SidecarOptions fast() {
    SidecarOptions o;
    o.connect_timeout = 1000ms;
    o.read_timeout = 2000ms;
    o.retry_backoff = 1ms;
    return o;
}

const char* kParis = "{\"index\":0,\"text\":\"Par\",\"entropy\":1.2,\"attn_to_past\":{}}\n"
                     "{\"index\":1,\"text\":\"is\",\"entropy\":0.3,\"attn_to_past\":{\"0\":0.71}}\n"
                     "{\"index\":2,\"text\":\" won\",\"entropy\":0.9,\"attn_to_past\":{\"0\":0.2,\"1\":0.4}}\n"
                     "{\"finish_reason\":\"stop\"}\n";

} // namespace

TEST_CASE("attention is folded into per-token maxima") {
    MockSidecar mock;
    mock.body(kParis);
    SidecarProvider p(mock.url(), fast());
    auto seg = p.generate({"prompt", 16, {"\n"}});
    CHECK(seg.text == "Paris won");
    REQUIRE(seg.events.size() == 3);
    CHECK(seg.events[0].max_attn == 0.71);
    CHECK(seg.events[1].max_attn == 0.4);
    CHECK(seg.events[2].max_attn == 0.0);
    CHECK(seg.events[0].entropy == 1.2);
    CHECK(seg.finish_reason == FinishReason::Stop);

    CHECK(mock.last_request()["prompt"] == "prompt");
    CHECK(mock.last_request()["max_tokens"] == 16);
    CHECK(mock.last_request()["stop"] == nlohmann::json::array({"\n"}));
}

TEST_CASE("length finish reason and empty streams") {
    MockSidecar mock;
    mock.body("{\"index\":0,\"text\":\"a\",\"entropy\":0.5}\n{\"finish_reason\":\"length\"}\n");
    SidecarProvider p(mock.url(), fast());
    auto seg = p.generate({"x"});
    CHECK(seg.finish_reason == FinishReason::Length);
    CHECK(seg.events.size() == 1);
}

TEST_CASE("terminal error record raises a provider error") {
    MockSidecar mock;
    mock.body("{\"finish_reason\":\"error\",\"message\":\"CUDA out of memory\"}\n");
    SidecarProvider p(mock.url(), fast());
    try {
        p.generate({"x"});
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(std::string(e.what()).find("CUDA out of memory") != std::string::npos);
    }
}

TEST_CASE("protocol violations") {
    MockSidecar mock;
    SidecarProvider p(mock.url(), fast());

    mock.body("{\"index\":0,\"text\":\"a\",\"entropy\":0.5}\n");
    CHECK_THROWS_AS(p.generate({"x"}), ProtocolViolation);

    mock.body("{\"index\":1,\"text\":\"a\",\"entropy\":0.5}\n{\"finish_reason\":\"stop\"}\n");
    CHECK_THROWS_AS(p.generate({"x"}), ProtocolViolation);

    mock.body("{\"index\":0,\"text\":\"a\",\"entropy\":0.5,\"attn_to_past\":{\"0\":0.3}}\n{\"finish_reason\":\"stop\"}\n");
    CHECK_THROWS_AS(p.generate({"x"}), ProtocolViolation);

    mock.body("garbage\n");
    CHECK_THROWS_AS(p.generate({"x"}), ProtocolViolation);

    mock.body("{\"finish_reason\":\"stop\"}\n");
    mock.statuses({400});
    CHECK_THROWS_AS(p.generate({"x"}), ProtocolViolation);
}

TEST_CASE("busy responses are retried") {
    MockSidecar mock;
    mock.body(kParis);
    mock.statuses({503, 429});
    SidecarProvider p(mock.url(), fast());
    CHECK(p.generate({"x"}).text == "Paris won");
    CHECK(mock.hits() == 3);

    mock.statuses({503, 503, 503});
    CHECK_THROWS_AS(p.generate({"x"}), BackendUnreachable);
}

TEST_CASE("unreachable sidecar") {
    int port = 0;
    {
        httplib::Server s;
        port = s.bind_to_any_port("127.0.0.1");
    }
    SidecarProvider p("http://127.0.0.1:" + std::to_string(port), fast());
    CHECK_THROWS_AS(p.generate({"x"}), BackendUnreachable);
    CHECK_FALSE(p.health().has_value());
}

TEST_CASE("health check") {
    MockSidecar mock;
    SidecarProvider p(mock.url(), fast());
    CHECK(p.health() == "mock-7b");
    mock.health(R"({"status":"loading"})");
    CHECK_FALSE(p.health().has_value());
}

TEST_CASE("fold matches a direct recomputation on random streams") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + rng() % 20;
        std::vector<SidecarEvent> events(n);
        std::map<std::size_t, double> expected;
        for (std::size_t i = 0; i < n; ++i) {
            events[i].index = i;
            events[i].text = "t" + std::to_string(i);
            events[i].entropy = 3.0 * u(rng);
            for (std::size_t j = 0; j < i; ++j)
                if (rng() % 2) events[i].attn_to_past.emplace_back(j, u(rng));
        }
        // Oracle: scan every (i, j) pair.
        for (std::size_t j = 0; j < n; ++j) {
            double m = 0.0;
            for (std::size_t i = j + 1; i < n; ++i)
                for (auto [past, w] : events[i].attn_to_past)
                    if (past == j) m = std::max(m, w);
            expected[j] = m;
        }
        auto seg = fold_sidecar_events(events, FinishReason::Stop);
        for (std::size_t j = 0; j < n; ++j) CHECK(seg.events[j].max_attn == expected[j]);
    }
}
