#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace hoprag {

enum class AnswerType { Span, YesNo };

struct QAExample {
    std::string qid;
    std::string question;
    std::vector<std::string> gold_answers;
    AnswerType answer_type = AnswerType::Span;

    friend bool operator==(const QAExample&, const QAExample&) = default;
};

/// Unified newline-delimited format:
///   {"qid":..., "question":..., "answers":[...], "answer_type":"span"|"yesno"}
std::vector<QAExample> parse_dataset(std::string_view content);
std::vector<QAExample> load_dataset(const std::filesystem::path& path);
std::string serialize_dataset(const std::vector<QAExample>& examples);

enum class BenchmarkFormat { HotpotQA, TwoWiki, StrategyQA, IIRC };

BenchmarkFormat benchmark_format_from_string(std::string_view s);

/// Converts an upstream distribution file (a JSON document) to unified examples.
std::vector<QAExample> convert_benchmark(const nlohmann::json& upstream, BenchmarkFormat format);

} // namespace hoprag
