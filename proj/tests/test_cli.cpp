#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "scenario.hpp"

using namespace hoprag;
using namespace hoprag::testing;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("ingest writes a snapshot") {
    TempDir dir("cli-ingest");
    auto corpus = dir.path() / "c.jsonl";
    write_file(corpus, corpus_jsonl(golden_scenario().corpus));
    auto r = invoke({"ingest", "--corpus", corpus.string(), "--snapshot", (dir.path() / "c.hrix").string()});
    CHECK(r.code == 0);
    CHECK(r.out.starts_with("indexed 6 documents"));
    CHECK(std::filesystem::exists(dir.path() / "c.hrix"));

    auto missing = invoke({"ingest", "--corpus", (dir.path() / "nope.jsonl").string(), "--snapshot", "x"});
    CHECK(missing.code == 2);
    CHECK(missing.err.starts_with("error: "));
}

TEST_CASE("convert produces the unified format") {
    TempDir dir("cli-convert");
    auto in = dir.path() / "hotpot.json";
    write_file(in, R"([{"_id":"h1","question":"Who?","answer":"Ridley Scott"}])");
    auto outp = dir.path() / "out.jsonl";
    auto r = invoke({"convert", "--format", "hotpotqa", "--input", in.string(), "--output", outp.string()});
    CHECK(r.code == 0);
    CHECK(slurp(outp) == "{\"qid\":\"h1\",\"question\":\"Who?\",\"answers\":[\"Ridley Scott\"],\"answer_type\":\"span\"}\n");

    CHECK(invoke({"convert", "--format", "squad", "--input", in.string(), "--output", outp.string()}).code == 1);
    write_file(in, "{broken");
    CHECK(invoke({"convert", "--format", "hotpotqa", "--input", in.string(), "--output", outp.string()}).code == 2);
}

TEST_CASE("run writes reports and trace-dump reads them back") {
    TempDir dir("cli-run");
    auto suite = write_scripted_suite(dir.path(), 4, 11);
    auto out_dir = dir.path() / "out";
    auto r = invoke({"run", "--dataset", suite.dataset.string(), "--corpus", suite.corpus.string(), "--provider",
                  "trace:" + suite.traces.string(), "--out", out_dir.string(), "--mode", "conf",
                  "--snapshot", (dir.path() / "idx.hrix").string()});
    CHECK(r.code == 0);
    CHECK(r.out.starts_with("| EM | F1 | Acc | Prec. | #Ret | failures |\n"));
    CHECK(r.out.find("| 50.0 | ") != std::string::npos);
    CHECK(std::filesystem::exists(dir.path() / "idx.hrix"));

    auto dump = invoke({"trace-dump", (out_dir / "hoptraces.jsonl").string()});
    CHECK(dump.code == 0);
    CHECK(dump.out.find("== q00: Who is the paternal grandfather of") != std::string::npos);
    CHECK(dump.out.find("subquery: ") != std::string::npos);

    // Same inputs, same bytes.
    auto again = dir.path() / "again";
    invoke({"run", "--dataset", suite.dataset.string(), "--corpus", suite.corpus.string(), "--provider",
         "trace:" + suite.traces.string(), "--out", again.string(), "--mode", "conf", "--workers", "2"});
    CHECK(slurp(again / "hoptraces.jsonl") == slurp(out_dir / "hoptraces.jsonl"));
    CHECK(slurp(again / "records.jsonl") == slurp(out_dir / "records.jsonl"));
}

TEST_CASE("sweep prints the aggregator and trigger tables") {
    TempDir dir("cli-sweep");
    auto suite = write_scripted_suite(dir.path(), 4, 5);
    auto r = invoke({"sweep", "--dataset", suite.dataset.string(), "--corpus", suite.corpus.string(), "--provider",
                  "trace:" + suite.traces.string(), "--triggers", "fixed:0.6", "dynamic", "--out",
                  (dir.path() / "sw").string()});
    CHECK(r.code == 0);
    CHECK(r.out.starts_with("| gamma | delta | EM | F1 | #Ret |\n"));
    CHECK(r.out.find("| 1.5 | 0.3 | ") != std::string::npos);
    CHECK(r.out.find("| 0.6 (Fixed) | ") != std::string::npos);
    CHECK(slurp(dir.path() / "sw" / "sweep.md") == r.out);
}

TEST_CASE("exit codes") {
    CHECK(invoke({}).code == 1);
    CHECK(invoke({"frobnicate"}).code == 1);
    CHECK(invoke({"--help"}).code == 0);

    TempDir dir("cli-codes");
    auto suite = write_scripted_suite(dir.path(), 2, 1);
    std::vector<std::string> base{"run", "--dataset", suite.dataset.string(), "--corpus", suite.corpus.string(),
                                  "--out", (dir.path() / "o").string()};
    auto with = [&](std::vector<std::string> extra) {
        auto a = base;
        a.insert(a.end(), extra.begin(), extra.end());
        return invoke(a).code;
    };
    CHECK(with({"--provider", "bogus"}) == 1);
    CHECK(with({"--provider", "trace:" + suite.traces.string(), "--mode", "sometimes"}) == 1);
    CHECK(with({"--provider", "trace:" + suite.traces.string(), "--trigger", "fixed:abc"}) == 1);
    CHECK(with({"--provider", "trace:" + suite.traces.string(), "--max-hops", "0"}) == 1);
    CHECK(with({"--provider", "sidecar:http://127.0.0.1:9"}) == 3);

    write_file(suite.dataset, "not json\n");
    CHECK(with({"--provider", "trace:" + suite.traces.string()}) == 2);

    write_file(dir.path() / "bad.jsonl", "{\"hops\":[{}]}\n");
    CHECK(invoke({"trace-dump", (dir.path() / "bad.jsonl").string()}).code == 2);
}
