#pragma once

// Scripted fixtures shared by the unit, CLI and acceptance tests: segment
// builders, the grandfather golden scenario and a synthetic multi-question
// suite written to disk.

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "hoprag/dataset.hpp"
#include "hoprag/llm_gateway.hpp"
#include "hoprag/retriever.hpp"

namespace hoprag::testing {

/// Splits text into whitespace-terminated word tokens ("Who ", "is ", ...).
std::vector<std::string> word_tokens(const std::string& text);

/// Every token gets the same signals, so a dynamic trigger never fires.
GenerationSegment flat_segment(const std::string& text, double entropy = 0.2, double attn = 0.1);

/// Flat signals except token `spike`, which gets a high entropy and attention.
GenerationSegment spiky_segment(const std::string& text, std::size_t spike, double base_entropy = 0.2,
                                double base_attn = 0.1, double spike_entropy = 2.5, double spike_attn = 0.9);

GenerationSegment make_segment(const std::vector<std::tuple<std::string, double, double>>& tokens,
                               FinishReason reason = FinishReason::Stop);

/// The grandfather question, six documents and a three-record trace:
/// two uncertain hops and a confident final hop stating the answer.
struct GoldenScenario {
    std::string question;
    std::string answer;
    std::vector<Document> corpus;
    TraceFile trace;
};

GoldenScenario golden_scenario();

std::string corpus_jsonl(const std::vector<Document>& docs);

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& content);

/// A synthetic family-tree suite: a corpus of parent facts and one scripted
/// trace per question under traces/. Hop counts and answer correctness vary
/// across questions.
struct ScriptedSuite {
    std::filesystem::path corpus;
    std::filesystem::path dataset;
    std::filesystem::path traces;
    std::vector<QAExample> examples;
    std::vector<std::size_t> expected_retrievals; ///< triggered hops per question
};

ScriptedSuite write_scripted_suite(const std::filesystem::path& dir, std::size_t questions, std::uint64_t seed);

/// Prediction/gold pairs with hand-derived metric values.
struct MetricCase {
    std::string prediction;
    std::vector<std::string> golds;
    int em;
    double f1;
    std::optional<int> accuracy; ///< set for yes/no golds
};

const std::vector<MetricCase>& metric_table();

} // namespace hoprag::testing
