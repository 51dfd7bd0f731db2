#include <doctest.h>

#include <string>

#include "hoprag/error.hpp"
#include "hoprag/llm_gateway.hpp"
#include "scenario.hpp"

using namespace hoprag;
using hoprag::testing::flat_segment;
using hoprag::testing::make_segment;

namespace {

const char* kTwoRecords =
    R"({"step_key":"a","text":"Par is","events":[{"index":0,"text":"Par","entropy":1.2,"max_attn":0.71},{"index":1,"text":" is","entropy":0.3,"max_attn":0.0}],"finish_reason":"stop"})"
    "\n"
    R"({"step_key":"b","text":"x","events":[{"index":0,"text":"x","entropy":0.0,"max_attn":0.0}],"finish_reason":"length"})"
    "\n";

} // namespace

TEST_CASE("trace replay returns records in order and then runs dry") {
    TraceProvider p(parse_trace(kTwoRecords));
    CHECK(p.remaining() == 2);
    auto first = p.generate({"anything"});
    CHECK(first.text == "Par is");
    REQUIRE(first.events.size() == 2);
    CHECK(first.events[0].entropy == 1.2);
    CHECK(first.events[0].max_attn == 0.71);
    CHECK(first.finish_reason == FinishReason::Stop);
    auto second = p.generate({"something else"});
    CHECK(second.finish_reason == FinishReason::Length);
    CHECK(p.calls() == 2);
    CHECK_THROWS_AS(p.generate({"more"}), TraceExhausted);
}

TEST_CASE("replay is deterministic and ignores the request") {
    auto trace = parse_trace(kTwoRecords);
    TraceProvider a(trace), b(trace);
    CHECK(a.generate({"p1"}) == b.generate({"completely different", 3, {"\n"}}));
    CHECK(a.generate({"p2"}) == b.generate({"p3"}));
}

TEST_CASE("trace parse errors name the line") {
    const std::string bad =
        R"({"step_key":"a","text":"x","events":[{"index":0,"text":"x","entropy":0.1,"max_attn":0.0}],"finish_reason":"stop"})"
        "\n"
        R"({"step_key":"b","text":"y","events":[{"index":0,"text":"y","max_attn":0.0}],"finish_reason":"stop"})"
        "\n";
    try {
        parse_trace(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("entropy") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_trace("{not json}\n"), ParseError);
    CHECK_THROWS_AS(parse_trace("[1,2]\n"), ParseError);
}

TEST_CASE("duplicate step keys are rejected") {
    std::string twice = std::string(kTwoRecords) + std::string(kTwoRecords).substr(0, std::string(kTwoRecords).find('\n') + 1);
    try {
        parse_trace(twice);
        FAIL("expected DuplicateKey");
    } catch (const DuplicateKey& e) {
        CHECK(e.key() == "a");
    }
}

TEST_CASE("blank lines are skipped") {
    auto t = parse_trace(std::string("\n  \n") + kTwoRecords + "\n");
    CHECK(t.size() == 2);
}

TEST_CASE("event texts must concatenate to the segment text") {
    const std::string mismatch =
        R"({"step_key":"a","text":"xy","events":[{"index":0,"text":"x","entropy":0.1,"max_attn":0.0}],"finish_reason":"stop"})";
    CHECK_THROWS_AS(parse_trace(mismatch), ParseError);
    const std::string bad_attn =
        R"({"step_key":"a","text":"x","events":[{"index":0,"text":"x","entropy":0.1,"max_attn":1.5}],"finish_reason":"stop"})";
    CHECK_THROWS_AS(parse_trace(bad_attn), ParseError);
    const std::string bad_reason =
        R"({"step_key":"a","text":"x","events":[{"index":0,"text":"x","entropy":0.1,"max_attn":0.5}],"finish_reason":"eos"})";
    CHECK_THROWS_AS(parse_trace(bad_reason), ParseError);

    auto seg = flat_segment("one two three");
    CHECK_NOTHROW(validate_segment(seg));
    seg.text += "!";
    CHECK_THROWS_AS(validate_segment(seg), DataError);
}

TEST_CASE("serialize and parse round trip") {
    TraceFile t{{"k1", flat_segment("Hello wörld\n", 0.125, 0.5)},
                {"k2", make_segment({{"a", 1.5, 0.25}, {"b", 0.0, 1.0}}, FinishReason::TraceEnd)}};
    auto text = serialize_trace(t);
    CHECK(text.back() == '\n');
    auto back = parse_trace(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].step_key == "k1");
    CHECK(back[0].segment == t[0].segment);
    CHECK(back[1].segment == t[1].segment);
    CHECK(serialize_trace(back) == text);
}

TEST_CASE("recording provider captures what it forwards") {
    TraceProvider inner(parse_trace(kTwoRecords));
    RecordingProvider rec(inner);
    auto s1 = rec.generate({"p"});
    auto s2 = rec.generate({"q"});
    REQUIRE(rec.recorded().size() == 2);
    CHECK(rec.recorded()[0].step_key == "call-1");
    CHECK(rec.recorded()[1].segment == s2);

    TraceProvider replay(rec.recorded());
    CHECK(replay.generate({"z"}) == s1);
}

TEST_CASE("finish reason names") {
    CHECK(to_string(FinishReason::TraceEnd) == "trace_end");
    CHECK(finish_reason_from_string("length") == FinishReason::Length);
    CHECK_THROWS_AS(finish_reason_from_string("done"), DataError);
}
