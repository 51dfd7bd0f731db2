#include "hoprag/dataset.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "hoprag/error.hpp"
#include "hoprag/metrics.hpp"
#include "hoprag/text.hpp"

namespace hoprag {

namespace {

void validate_example(const QAExample& ex, std::size_t line) {
    if (ex.qid.empty()) throw ParseError(line, "empty qid");
    if (ex.gold_answers.empty()) throw ParseError(line, "example '" + ex.qid + "' has no answers");
    if (ex.answer_type == AnswerType::YesNo)
        for (const auto& a : ex.gold_answers) {
            auto n = normalize_answer(a);
            if (n != "yes" && n != "no")
                throw ParseError(line, "yes/no example '" + ex.qid + "' has answer '" + a + "'");
        }
}

AnswerType answer_type_of(const std::string& s, std::size_t line) {
    if (s == "span") return AnswerType::Span;
    if (s == "yesno") return AnswerType::YesNo;
    throw ParseError(line, "unknown answer_type '" + s + "'");
}

} // namespace

std::vector<QAExample> parse_dataset(std::string_view content) {
    std::vector<QAExample> out;
    std::unordered_set<std::string> qids;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        auto eol = content.find('\n', pos);
        if (eol == std::string_view::npos) eol = content.size();
        auto line = content.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (text::trim(line).empty()) continue;

        QAExample ex;
        try {
            auto j = nlohmann::json::parse(line);
            ex.qid = j.at("qid").get<std::string>();
            ex.question = j.at("question").get<std::string>();
            ex.gold_answers = j.at("answers").get<std::vector<std::string>>();
            ex.answer_type = answer_type_of(j.value("answer_type", "span"), line_no);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, std::string("malformed example: ") + e.what());
        }
        validate_example(ex, line_no);
        if (!qids.insert(ex.qid).second) throw DuplicateKey(ex.qid);
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<QAExample> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str());
}

std::string serialize_dataset(const std::vector<QAExample>& examples) {
    std::string out;
    for (const auto& ex : examples) {
        nlohmann::ordered_json j{{"qid", ex.qid},
                                 {"question", ex.question},
                                 {"answers", ex.gold_answers},
                                 {"answer_type", ex.answer_type == AnswerType::YesNo ? "yesno" : "span"}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

BenchmarkFormat benchmark_format_from_string(std::string_view s) {
    if (s == "hotpotqa") return BenchmarkFormat::HotpotQA;
    if (s == "2wikimultihopqa" || s == "2wiki") return BenchmarkFormat::TwoWiki;
    if (s == "strategyqa") return BenchmarkFormat::StrategyQA;
    if (s == "iirc") return BenchmarkFormat::IIRC;
    throw ConfigError("unknown benchmark format '" + std::string(s) + "'");
}

namespace {

AnswerType type_of_answer(const std::string& answer) {
    auto n = normalize_answer(answer);
    return (n == "yes" || n == "no") ? AnswerType::YesNo : AnswerType::Span;
}

std::vector<QAExample> convert_hotpot_like(const nlohmann::json& doc) {
    std::vector<QAExample> out;
    for (const auto& item : doc) {
        QAExample ex;
        ex.qid = item.at("_id").get<std::string>();
        ex.question = item.at("question").get<std::string>();
        auto answer = item.at("answer").get<std::string>();
        ex.answer_type = type_of_answer(answer);
        ex.gold_answers = {answer};
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<QAExample> convert_strategyqa(const nlohmann::json& doc) {
    std::vector<QAExample> out;
    for (const auto& item : doc) {
        QAExample ex;
        ex.qid = item.at("qid").get<std::string>();
        ex.question = item.at("question").get<std::string>();
        ex.answer_type = AnswerType::YesNo;
        ex.gold_answers = {item.at("answer").get<bool>() ? "yes" : "no"};
        out.push_back(std::move(ex));
    }
    return out;
}

std::string iirc_answer(const nlohmann::json& answer) {
    const auto type = answer.at("type").get<std::string>();
    if (type == "none") return "none";
    if (type == "span") {
        std::string joined;
        for (const auto& span : answer.at("answer_spans")) {
            if (!joined.empty()) joined += ", ";
            joined += span.at("text").get<std::string>();
        }
        return joined;
    }
    auto value = answer.at("answer_value").get<std::string>();
    if (type == "value" && answer.contains("answer_unit")) {
        auto unit = answer["answer_unit"].get<std::string>();
        if (!unit.empty()) value += " " + unit;
    }
    return value;
}

std::vector<QAExample> convert_iirc(const nlohmann::json& doc) {
    std::vector<QAExample> out;
    for (const auto& article : doc) {
        for (const auto& q : article.at("questions")) {
            QAExample ex;
            ex.qid = q.at("qid").get<std::string>();
            ex.question = q.at("question").get<std::string>();
            const auto& answer = q.at("answer");
            ex.gold_answers = {iirc_answer(answer)};
            ex.answer_type = answer.at("type").get<std::string>() == "binary" ? AnswerType::YesNo : AnswerType::Span;
            out.push_back(std::move(ex));
        }
    }
    return out;
}

} // namespace

std::vector<QAExample> convert_benchmark(const nlohmann::json& upstream, BenchmarkFormat format) {
    if (!upstream.is_array()) throw DataError("benchmark file must hold a JSON array");
    try {
        switch (format) {
        case BenchmarkFormat::HotpotQA:
        case BenchmarkFormat::TwoWiki: return convert_hotpot_like(upstream);
        case BenchmarkFormat::StrategyQA: return convert_strategyqa(upstream);
        case BenchmarkFormat::IIRC: return convert_iirc(upstream);
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("unexpected benchmark schema: ") + e.what());
    }
    return {};
}

} // namespace hoprag
