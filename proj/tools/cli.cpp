#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hoprag/benchmark.hpp"
#include "hoprag/dataset.hpp"
#include "hoprag/error.hpp"
#include "hoprag/orchestrator.hpp"
#include "hoprag/retriever.hpp"
#include "hoprag/sidecar_client.hpp"

namespace hoprag::cli {

namespace {

struct PipelineFlags {
    std::string mode = "cotconf";
    std::string trigger = "dynamic";
    double gamma = 1.0;
    double delta = 0.2;
    double alpha = 1.0;
    double beta = 1.0;
    std::size_t topk = 5;
    std::optional<double> conf_threshold;
    std::size_t retrieval_k = 3;
    std::size_t max_hops = 5;
    std::size_t max_tokens = 256;
    std::size_t memory_budget = 2000;
    std::string prompts_dir;
    double k1 = 1.2;
    double b = 0.75;
    std::string snapshot;
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::uint64_t seed = 0;
};

void add_pipeline_flags(CLI::App& cmd, PipelineFlags& f) {
    cmd.add_option("--mode", f.mode, "Entity filter: nofilter|cot|conf|cotconf")
        ->check(CLI::IsMember({"nofilter", "cot", "conf", "cotconf"}));
    cmd.add_option("--trigger", f.trigger, "Retrieval trigger: dynamic | fixed:<theta>");
    cmd.add_option("--gamma", f.gamma, "Confidence weight of 1/(1+entropy)");
    cmd.add_option("--delta", f.delta, "Confidence weight of max attention");
    cmd.add_option("--alpha", f.alpha, "Trigger weight of entropy");
    cmd.add_option("--beta", f.beta, "Trigger weight of max attention");
    cmd.add_option("--topk", f.topk, "Entities kept by confidence selection");
    cmd.add_option("--conf-threshold", f.conf_threshold, "Keep entities with confidence above this instead of top-k");
    cmd.add_option("--retrieval-k", f.retrieval_k, "Passages per retrieval call");
    cmd.add_option("--max-hops", f.max_hops, "Upper bound on generation hops");
    cmd.add_option("--max-tokens", f.max_tokens, "Token budget per generated segment");
    cmd.add_option("--memory-budget", f.memory_budget, "Bytes of memory rendered into prompts");
    cmd.add_option("--prompts", f.prompts_dir, "Directory overriding the prompt templates");
    cmd.add_option("--k1", f.k1, "BM25 k1");
    cmd.add_option("--b", f.b, "BM25 b");
    cmd.add_option("--snapshot", f.snapshot, "Index snapshot to reuse or refresh");
    cmd.add_option("--workers", f.workers, "Questions processed in parallel");
    cmd.add_option("--seed", f.seed, "Reserved; the engine is deterministic");
}

TriggerConfig parse_trigger(const std::string& s, double alpha, double beta) {
    TriggerConfig t;
    t.alpha = alpha;
    t.beta = beta;
    if (s == "dynamic") return t;
    if (s == "fixed") {
        t.mode = TriggerMode::Fixed;
        return t;
    }
    if (s.starts_with("fixed:")) {
        t.mode = TriggerMode::Fixed;
        try {
            std::size_t used = 0;
            t.fixed_threshold = std::stod(s.substr(6), &used);
            if (used != s.size() - 6) throw std::invalid_argument(s);
        } catch (const std::logic_error&) {
            throw ConfigError("bad trigger threshold in '" + s + "'");
        }
        return t;
    }
    throw ConfigError("trigger must be dynamic or fixed:<theta>, got '" + s + "'");
}

PipelineConfig to_config(const PipelineFlags& f) {
    PipelineConfig cfg;
    cfg.trigger = parse_trigger(f.trigger, f.alpha, f.beta);
    cfg.filter.mode = filter_mode_from_string(f.mode);
    cfg.filter.gamma = f.gamma;
    cfg.filter.delta = f.delta;
    if (f.conf_threshold)
        cfg.filter.selection = Threshold{*f.conf_threshold};
    else
        cfg.filter.selection = TopK{f.topk};
    cfg.retrieval_k = f.retrieval_k;
    cfg.max_hops = f.max_hops;
    cfg.max_tokens_per_segment = f.max_tokens;
    cfg.memory_budget_chars = f.memory_budget;
    if (!f.prompts_dir.empty()) cfg.prompts = PromptTemplates::load(f.prompts_dir);
    cfg.validate();
    return cfg;
}

InvertedIndex open_index(const std::string& corpus, const PipelineFlags& f) {
    Bm25Params params{f.k1, f.b};
    if (!f.snapshot.empty()) return load_or_build(corpus, f.snapshot, params);
    return ingest_corpus(corpus, params);
}

void check_provider(const std::string& spec) {
    if (!spec.starts_with("sidecar:")) return;
    SidecarProvider probe(spec.substr(8));
    if (!probe.health()) throw BackendUnreachable("sidecar " + spec.substr(8) + " is not ready");
}

std::vector<std::pair<double, double>> parse_grid(const std::string& s) {
    std::vector<std::pair<double, double>> grid;
    std::stringstream in(s);
    for (std::string item; std::getline(in, item, ',');) {
        auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("grid entries look like gamma:delta, got '" + item + "'");
        try {
            grid.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
        } catch (const std::logic_error&) {
            throw ConfigError("bad grid entry '" + item + "'");
        }
    }
    if (grid.empty()) throw ConfigError("empty grid");
    return grid;
}

std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void dump_trace(const nlohmann::json& t, std::ostream& out) {
    out << "== " << t.value("qid", "") << ": " << t.value("question", "") << "\n";
    if (t.contains("hops")) {
        for (const auto& h : t.at("hops")) {
            const auto& d = h.at("decision");
            out << "   hop " << h.at("hop_index").get<std::size_t>() << "  "
                << (d.at("triggered").get<bool>() ? "triggered " : "no trigger") << "  threshold "
                << d.at("threshold_used").get<double>() << "  max score " << d.at("max_score").get<double>();
            if (!d.at("token_index").is_null()) out << "  at token " << d.at("token_index").get<std::size_t>();
            out << "\n";
            for (const auto& e : h.at("kept")) {
                out << "          kept: " << e.at("surface").get<std::string>();
                if (!e.at("relation").is_null()) out << " (" << e.at("relation").get<std::string>() << ")";
                if (!e.at("confidence").is_null()) out << " [" << e.at("confidence").get<double>() << "]";
                out << "\n";
            }
            if (!h.at("subquery").is_null()) {
                auto q = h.at("subquery").get<std::string>();
                std::replace(q.begin(), q.end(), '\n', ' ');
                out << "          subquery: " << q << "\n";
            }
            if (!h.at("retrieved").empty()) {
                out << "          retrieved:";
                for (const auto& r : h.at("retrieved"))
                    out << " " << r.at("doc_id").get<std::string>() << " (" << r.at("score").get<double>() << ")";
                out << "\n";
            }
        }
    }
    if (t.contains("final_answer"))
        out << "   answer: " << t.at("final_answer").get<std::string>() << "\n"
            << "   retrievals: " << t.at("total_retrievals").get<std::size_t>()
            << "  terminated: " << t.at("terminated_by").get<std::string>()
            << "  memory records: " << t.at("memory").size() << "\n";
    if (t.contains("error")) out << "   error: " << t.at("error").get<std::string>() << "\n";
}

int exit_code_for(const Error& e) {
    switch (e.kind()) {
    case Error::Kind::Config: return kConfigError;
    case Error::Kind::Data: return kDataError;
    case Error::Kind::Provider: return kProviderError;
    }
    return kDataError;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Uncertainty-triggered multi-hop retrieval engine", "hoprag"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Build an index snapshot from a corpus");
    std::string ingest_corpus_path, ingest_snapshot;
    double ingest_k1 = 1.2, ingest_b = 0.75;
    ingest->add_option("--corpus", ingest_corpus_path, "Corpus (.jsonl)")->required();
    ingest->add_option("--snapshot", ingest_snapshot, "Snapshot file to write")->required();
    ingest->add_option("--k1", ingest_k1, "BM25 k1");
    ingest->add_option("--b", ingest_b, "BM25 b");

    // convert
    auto* convert = app.add_subcommand("convert", "Convert a benchmark file to the unified dataset format");
    std::string convert_format, convert_in, convert_out;
    convert->add_option("--format", convert_format, "hotpotqa|2wikimultihopqa|strategyqa|iirc")->required();
    convert->add_option("--input", convert_in, "Upstream JSON file")->required();
    convert->add_option("--output", convert_out, "Unified .jsonl to write")->required();

    // run
    auto* run = app.add_subcommand("run", "Run a benchmark");
    std::string run_dataset, run_corpus, run_provider, run_out = "out";
    PipelineFlags run_flags;
    run->add_option("--dataset", run_dataset, "Unified dataset (.jsonl)")->required();
    run->add_option("--corpus", run_corpus, "Corpus (.jsonl)")->required();
    run->add_option("--provider", run_provider, "trace:<dir> | sidecar:<url>")->required();
    run->add_option("--out", run_out, "Output directory");
    add_pipeline_flags(*run, run_flags);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run a (gamma, delta) grid and optional trigger settings");
    std::string sweep_dataset, sweep_corpus, sweep_out;
    std::vector<std::string> sweep_providers;
    std::string sweep_grid = "0.5:0.1,1.0:0.2,1.5:0.3";
    std::vector<std::string> sweep_triggers;
    PipelineFlags sweep_flags;
    sweep_flags.mode = "conf";
    sweep->add_option("--dataset", sweep_dataset, "Unified dataset (.jsonl)")->required();
    sweep->add_option("--corpus", sweep_corpus, "Corpus (.jsonl)")->required();
    sweep->add_option("--provider", sweep_providers, "trace:<dir> | sidecar:<url>; repeat for repeated runs")
        ->required();
    sweep->add_option("--grid", sweep_grid, "Comma-separated gamma:delta pairs");
    sweep->add_option("--triggers", sweep_triggers, "Trigger settings for a threshold table, e.g. fixed:0.6 dynamic");
    sweep->add_option("--out", sweep_out, "Directory for the report files");
    add_pipeline_flags(*sweep, sweep_flags);

    // trace-dump
    auto* dump = app.add_subcommand("trace-dump", "Pretty-print a HopTrace stream");
    std::string dump_input;
    dump->add_option("input", dump_input, "hoptraces.jsonl")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*ingest) {
            const auto content = read_all(ingest_corpus_path);
            auto index = InvertedIndex::build(parse_corpus(content), {ingest_k1, ingest_b});
            index.save_snapshot(ingest_snapshot, corpus_hash(content));
            out << "indexed " << index.doc_count() << " documents, " << index.term_count() << " terms -> "
                << ingest_snapshot << "\n";
        } else if (*convert) {
            auto format = benchmark_format_from_string(convert_format);
            nlohmann::json upstream;
            try {
                upstream = nlohmann::json::parse(read_all(convert_in));
            } catch (const nlohmann::json::parse_error& e) {
                throw DataError(std::string("invalid JSON in ") + convert_in + ": " + e.what());
            }
            auto examples = convert_benchmark(upstream, format);
            std::ofstream o(convert_out, std::ios::binary | std::ios::trunc);
            if (!o) throw DataError("cannot write " + convert_out);
            o << serialize_dataset(examples);
            out << "converted " << examples.size() << " examples -> " << convert_out << "\n";
        } else if (*run) {
            auto cfg = to_config(run_flags);
            auto providers = make_provider_factory(run_provider);
            auto examples = load_dataset(run_dataset);
            auto index = open_index(run_corpus, run_flags);
            check_provider(run_provider);
            auto result = run_benchmark(examples, index, cfg, providers, run_flags.workers);
            write_run_outputs(run_out, result);
            out << format_summary_table(result.report.aggregates);
        } else if (*sweep) {
            auto base = to_config(sweep_flags);
            auto grid = parse_grid(sweep_grid);
            std::vector<TriggerConfig> triggers;
            for (const auto& t : sweep_triggers) triggers.push_back(parse_trigger(t, sweep_flags.alpha, sweep_flags.beta));
            std::vector<ProviderFactory> factories;
            for (const auto& p : sweep_providers) {
                factories.push_back(make_provider_factory(p));
                check_provider(p);
            }
            auto examples = load_dataset(sweep_dataset);
            auto index = open_index(sweep_corpus, sweep_flags);

            auto agg = sweep_aggregator(examples, index, base, grid, factories, sweep_flags.workers);
            std::string report = format_aggregator_table(agg);
            if (!triggers.empty())
                report += "\n" + format_trigger_table(
                                     sweep_trigger(examples, index, base, triggers, factories, sweep_flags.workers));
            out << report;
            if (!sweep_out.empty()) {
                std::filesystem::create_directories(sweep_out);
                std::ofstream o(std::filesystem::path(sweep_out) / "sweep.md", std::ios::binary | std::ios::trunc);
                o << report;
            }
        } else if (*dump) {
            const auto content = read_all(dump_input);
            std::istringstream in(content);
            std::size_t line_no = 0;
            for (std::string line; std::getline(in, line);) {
                ++line_no;
                if (line.empty()) continue;
                try {
                    dump_trace(nlohmann::json::parse(line), out);
                } catch (const nlohmann::json::exception& e) {
                    throw ParseError(line_no, e.what());
                }
            }
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    }
    return kOk;
}

} // namespace hoprag::cli
