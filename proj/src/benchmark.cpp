#include "hoprag/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <thread>

#include "hoprag/error.hpp"
#include "hoprag/metrics.hpp"
#include "hoprag/sidecar_client.hpp"

namespace hoprag {

using nlohmann::ordered_json;

ProviderFactory make_provider_factory(const std::string& spec) {
    if (spec.starts_with("trace:")) {
        std::filesystem::path dir = spec.substr(6);
        if (dir.empty()) throw ConfigError("trace provider needs a directory");
        return [dir](const QAExample& ex) -> std::unique_ptr<Provider> {
            return std::make_unique<TraceProvider>(load_trace(dir / (ex.qid + ".jsonl")));
        };
    }
    if (spec.starts_with("sidecar:")) {
        std::string url = spec.substr(8);
        if (url.empty()) throw ConfigError("sidecar provider needs a URL");
        return [url](const QAExample&) -> std::unique_ptr<Provider> {
            return std::make_unique<SidecarProvider>(url);
        };
    }
    throw ConfigError("provider must be trace:<dir> or sidecar:<url>, got '" + spec + "'");
}

Aggregates aggregate(std::span<const ExampleResult> results) {
    Aggregates a;
    double em = 0, f1 = 0, prec = 0, ret = 0, acc = 0;
    std::size_t yesno = 0;
    for (const auto& r : results) {
        if (r.error) {
            ++a.failures;
            continue;
        }
        ++a.scored;
        em += r.em;
        f1 += r.f1;
        prec += r.precision;
        ret += static_cast<double>(r.retrievals);
        if (r.accuracy) {
            ++yesno;
            acc += *r.accuracy;
        }
    }
    if (a.scored > 0) {
        const auto n = static_cast<double>(a.scored);
        a.em_pct = 100.0 * em / n;
        a.f1_pct = 100.0 * f1 / n;
        a.precision_pct = 100.0 * prec / n;
        a.mean_retrievals = ret / n;
    }
    if (yesno > 0) a.accuracy_pct = 100.0 * acc / static_cast<double>(yesno);
    return a;
}

ExampleResult score_example(const QAExample& ex, const HopTrace& trace) {
    ExampleResult r;
    r.qid = ex.qid;
    r.answer_type = ex.answer_type;
    r.prediction = trace.final_answer;
    r.em = exact_match(r.prediction, ex.gold_answers);
    r.f1 = token_f1(r.prediction, ex.gold_answers);
    r.precision = token_precision(r.prediction, ex.gold_answers);
    if (ex.answer_type == AnswerType::YesNo) r.accuracy = yesno_accuracy(r.prediction, ex.gold_answers.front());
    r.retrievals = trace.total_retrievals;
    return r;
}

namespace {

struct Slot {
    ExampleResult result;
    ordered_json trace;
};

Slot run_one(const QAExample& ex, const InvertedIndex& index, const PipelineConfig& cfg,
             const ProviderFactory& providers) {
    Slot slot;
    slot.result.qid = ex.qid;
    slot.result.answer_type = ex.answer_type;
    try {
        auto provider = providers(ex);
        auto trace = run_question(ex.question, *provider, index, cfg);
        trace.qid = ex.qid;
        slot.result = score_example(ex, trace);
        slot.trace = hoptrace_to_json(trace);
    } catch (const PipelineError& e) {
        auto partial = e.partial();
        partial.qid = ex.qid;
        slot.result.error = e.what();
        slot.result.retrievals = partial.total_retrievals;
        slot.trace = hoptrace_to_json(partial);
        slot.trace["error"] = e.what();
    } catch (const Error& e) {
        slot.result.error = e.what();
        slot.trace = ordered_json{{"qid", ex.qid}, {"question", ex.question}, {"error", e.what()}};
    }
    return slot;
}

} // namespace

RunOutput run_benchmark(std::span<const QAExample> examples, const InvertedIndex& index,
                        const PipelineConfig& cfg, const ProviderFactory& providers, std::size_t workers) {
    cfg.validate();
    std::vector<Slot> slots(examples.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < examples.size();)
            slots[i] = run_one(examples[i], index, cfg, providers);
    };

    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(examples.size(), 1));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    std::vector<std::size_t> order(slots.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return slots[a].result.qid < slots[b].result.qid; });

    RunOutput out;
    out.report.config = config_to_json(cfg);
    for (auto i : order) {
        out.report.examples.push_back(std::move(slots[i].result));
        out.traces.push_back(std::move(slots[i].trace));
    }
    out.report.aggregates = aggregate(out.report.examples);
    return out;
}

ordered_json example_to_json(const ExampleResult& r) {
    ordered_json j{{"qid", r.qid},
                   {"answer_type", r.answer_type == AnswerType::YesNo ? "yesno" : "span"},
                   {"prediction", r.prediction},
                   {"em", r.em},
                   {"f1", r.f1},
                   {"precision", r.precision}};
    j["accuracy"] = r.accuracy ? ordered_json(*r.accuracy) : ordered_json(nullptr);
    j["retrievals"] = r.retrievals;
    j["error"] = r.error ? ordered_json(*r.error) : ordered_json(nullptr);
    return j;
}

ExampleResult example_from_json(const nlohmann::json& j) {
    ExampleResult r;
    r.qid = j.at("qid").get<std::string>();
    r.answer_type = j.at("answer_type").get<std::string>() == "yesno" ? AnswerType::YesNo : AnswerType::Span;
    r.prediction = j.at("prediction").get<std::string>();
    r.em = j.at("em").get<int>();
    r.f1 = j.at("f1").get<double>();
    r.precision = j.at("precision").get<double>();
    if (!j.at("accuracy").is_null()) r.accuracy = j.at("accuracy").get<int>();
    r.retrievals = j.at("retrievals").get<std::size_t>();
    if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
    return r;
}

ordered_json report_to_json(const RunReport& report) {
    const auto& a = report.aggregates;
    ordered_json agg{{"examples", report.examples.size()},
                     {"scored", a.scored},
                     {"failures", a.failures},
                     {"em", a.em_pct},
                     {"f1", a.f1_pct},
                     {"precision", a.precision_pct}};
    agg["accuracy"] = a.accuracy_pct ? ordered_json(*a.accuracy_pct) : ordered_json(nullptr);
    agg["mean_retrievals"] = a.mean_retrievals;
    return ordered_json{{"aggregates", std::move(agg)}, {"config", report.config}};
}

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
}

} // namespace

std::string format_summary_table(const Aggregates& a) {
    std::string t = "| EM | F1 | Acc | Prec. | #Ret | failures |\n";
    t += "|---:|---:|----:|------:|-----:|---------:|\n";
    t += "| " + fixed(a.em_pct, 1) + " | " + fixed(a.f1_pct, 1) + " | " +
         (a.accuracy_pct ? fixed(*a.accuracy_pct, 1) : std::string("-")) + " | " + fixed(a.precision_pct, 1) +
         " | " + fixed(a.mean_retrievals, 2) + " | " + std::to_string(a.failures) + " |\n";
    return t;
}

void write_run_outputs(const std::filesystem::path& dir, const RunOutput& output) {
    std::filesystem::create_directories(dir);
    std::string records, traces;
    for (const auto& r : output.report.examples) records += example_to_json(r).dump() + "\n";
    for (const auto& t : output.traces) traces += t.dump() + "\n";
    write_text(dir / "records.jsonl", records);
    write_text(dir / "hoptraces.jsonl", traces);
    write_text(dir / "report.json", report_to_json(output.report).dump(2) + "\n");
    write_text(dir / "summary.md", format_summary_table(output.report.aggregates));
}

namespace {

std::vector<Aggregates> run_all(std::span<const QAExample> examples, const InvertedIndex& index,
                                const PipelineConfig& cfg, std::span<const ProviderFactory> providers,
                                std::size_t workers) {
    std::vector<Aggregates> runs;
    for (const auto& p : providers)
        runs.push_back(run_benchmark(examples, index, cfg, p, workers).report.aggregates);
    return runs;
}

std::string cell(const std::vector<Aggregates>& runs, double (*get)(const Aggregates&), int digits) {
    double mean = 0.0;
    for (const auto& r : runs) mean += get(r);
    mean /= static_cast<double>(runs.size());
    std::string s = fixed(mean, digits);
    if (runs.size() > 1) {
        double ss = 0.0;
        for (const auto& r : runs) ss += (get(r) - mean) * (get(r) - mean);
        s += "±" + fixed(std::sqrt(ss / static_cast<double>(runs.size() - 1)), digits);
    }
    return s;
}

double em_frac(const Aggregates& a) { return a.em_pct / 100.0; }
double f1_frac(const Aggregates& a) { return a.f1_pct / 100.0; }
double prec_frac(const Aggregates& a) { return a.precision_pct / 100.0; }
double mean_ret(const Aggregates& a) { return a.mean_retrievals; }

std::string short_number(double v) {
    auto s = fixed(v, 3);
    while (s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
    return s;
}

} // namespace

std::string trigger_label(const TriggerConfig& t) {
    return t.mode == TriggerMode::Fixed ? short_number(t.fixed_threshold) + " (Fixed)" : std::string("Dynamic");
}

std::vector<SweepPoint> sweep_aggregator(std::span<const QAExample> examples, const InvertedIndex& index,
                                         const PipelineConfig& base,
                                         std::span<const std::pair<double, double>> grid,
                                         std::span<const ProviderFactory> providers, std::size_t workers) {
    if (providers.empty()) throw ConfigError("sweep needs at least one provider");
    std::vector<SweepPoint> points;
    for (auto [gamma, delta] : grid) {
        auto cfg = base;
        cfg.filter.gamma = gamma;
        cfg.filter.delta = delta;
        points.push_back({short_number(gamma), short_number(delta), run_all(examples, index, cfg, providers, workers)});
    }
    return points;
}

std::vector<SweepPoint> sweep_trigger(std::span<const QAExample> examples, const InvertedIndex& index,
                                      const PipelineConfig& base, std::span<const TriggerConfig> triggers,
                                      std::span<const ProviderFactory> providers, std::size_t workers) {
    if (providers.empty()) throw ConfigError("sweep needs at least one provider");
    std::vector<SweepPoint> points;
    for (const auto& t : triggers) {
        auto cfg = base;
        cfg.trigger = t;
        points.push_back({trigger_label(t), "", run_all(examples, index, cfg, providers, workers)});
    }
    return points;
}

std::string format_aggregator_table(std::span<const SweepPoint> points) {
    std::string t = "| gamma | delta | EM | F1 | #Ret |\n";
    t += "|------:|------:|---:|---:|-----:|\n";
    for (const auto& p : points)
        t += "| " + p.label_a + " | " + p.label_b + " | " + cell(p.runs, em_frac, 3) + " | " +
             cell(p.runs, f1_frac, 3) + " | " + cell(p.runs, mean_ret, 2) + " |\n";
    return t;
}

std::string format_trigger_table(std::span<const SweepPoint> points) {
    std::string t = "| Threshold | EM | F1 | Prec. |\n";
    t += "|:----------|---:|---:|------:|\n";
    for (const auto& p : points)
        t += "| " + p.label_a + " | " + cell(p.runs, em_frac, 3) + " | " + cell(p.runs, f1_frac, 3) + " | " +
             cell(p.runs, prec_frac, 3) + " |\n";
    return t;
}

} // namespace hoprag
