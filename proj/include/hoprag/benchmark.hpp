#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hoprag/dataset.hpp"
#include "hoprag/orchestrator.hpp"

namespace hoprag {

/// Creates one provider session per question.
using ProviderFactory = std::function<std::unique_ptr<Provider>(const QAExample&)>;

/// "trace:<dir>" replays <dir>/<qid>.jsonl; "sidecar:<url>" streams from a
/// live sidecar. Throws ConfigError for anything else.
ProviderFactory make_provider_factory(const std::string& spec);

struct ExampleResult {
    std::string qid;
    AnswerType answer_type = AnswerType::Span;
    std::string prediction;
    int em = 0;
    double f1 = 0.0;
    double precision = 0.0;
    std::optional<int> accuracy; ///< yes/no examples only
    std::size_t retrievals = 0;
    std::optional<std::string> error; ///< set when the example failed
};

struct Aggregates {
    std::size_t scored = 0;
    std::size_t failures = 0;
    double em_pct = 0.0;
    double f1_pct = 0.0;
    double precision_pct = 0.0;
    std::optional<double> accuracy_pct; ///< over yes/no examples, when any
    double mean_retrievals = 0.0;
};

/// Means over the non-failed examples; percentages are x100.
Aggregates aggregate(std::span<const ExampleResult> results);

struct RunReport {
    std::vector<ExampleResult> examples; ///< ordered by qid
    Aggregates aggregates;
    nlohmann::ordered_json config;
};

struct RunOutput {
    RunReport report;
    std::vector<nlohmann::ordered_json> traces; ///< HopTrace per example, same order
};

/// Scores a finished (or failed) question.
ExampleResult score_example(const QAExample& ex, const HopTrace& trace);

/// Runs every example in a pool of `workers` independent pipelines. A failing
/// example is recorded with its error and excluded from the aggregates.
RunOutput run_benchmark(std::span<const QAExample> examples, const InvertedIndex& index,
                        const PipelineConfig& cfg, const ProviderFactory& providers, std::size_t workers = 1);

nlohmann::ordered_json example_to_json(const ExampleResult& r);
ExampleResult example_from_json(const nlohmann::json& j);
nlohmann::ordered_json report_to_json(const RunReport& report);

/// records.jsonl, hoptraces.jsonl, report.json and summary.md under `dir`.
void write_run_outputs(const std::filesystem::path& dir, const RunOutput& output);

/// One-row markdown table: EM, F1, Acc, Prec., #Ret, failures.
std::string format_summary_table(const Aggregates& a);

struct SweepPoint {
    std::string label_a; ///< gamma, or the threshold label
    std::string label_b; ///< delta, or empty
    std::vector<Aggregates> runs; ///< one per provider set
};

/// (gamma, delta) grid; every point runs over every provider set.
std::vector<SweepPoint> sweep_aggregator(std::span<const QAExample> examples, const InvertedIndex& index,
                                         const PipelineConfig& base,
                                         std::span<const std::pair<double, double>> grid,
                                         std::span<const ProviderFactory> providers, std::size_t workers = 1);

/// Trigger settings, e.g. fixed 0.6 against dynamic.
std::vector<SweepPoint> sweep_trigger(std::span<const QAExample> examples, const InvertedIndex& index,
                                      const PipelineConfig& base, std::span<const TriggerConfig> triggers,
                                      std::span<const ProviderFactory> providers, std::size_t workers = 1);

/// | gamma | delta | EM | F1 | #Ret | with EM/F1 as fractions.
std::string format_aggregator_table(std::span<const SweepPoint> points);

/// | Threshold | EM | F1 | Prec. |
std::string format_trigger_table(std::span<const SweepPoint> points);

std::string trigger_label(const TriggerConfig& t);

} // namespace hoprag
