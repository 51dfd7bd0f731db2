#include "hoprag/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hoprag/error.hpp"
#include "hoprag/text.hpp"

namespace hoprag {

std::vector<std::string> tokenize(std::string_view text) { return text::alnum_terms(text); }

InvertedIndex InvertedIndex::build(std::vector<Document> docs, Bm25Params params) {
    InvertedIndex index;
    index.params_ = params;
    index.docs_ = std::move(docs);
    index.doc_lengths_.reserve(index.docs_.size());

    for (std::size_t ord = 0; ord < index.docs_.size(); ++ord) {
        const auto& doc = index.docs_[ord];
        if (text::trim(doc.text).empty()) throw DataError("document '" + doc.doc_id + "' has empty text");
        if (!index.ordinal_of_.emplace(doc.doc_id, ord).second) throw DuplicateKey(doc.doc_id);

        auto terms = tokenize(doc.title + " " + doc.text);
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(terms.size()));
        std::map<std::string_view, std::uint32_t> tf;
        for (const auto& t : terms) ++tf[t];
        for (const auto& [term, count] : tf)
            index.postings_[std::string(term)].push_back({static_cast<std::uint32_t>(ord), count});
    }
    index.finalize();
    return index;
}

void InvertedIndex::finalize() {
    ordinal_of_.clear();
    for (std::size_t ord = 0; ord < docs_.size(); ++ord) ordinal_of_.emplace(docs_[ord].doc_id, ord);
    double total = 0.0;
    for (auto len : doc_lengths_) total += len;
    avg_doc_length_ = docs_.empty() ? 0.0 : total / static_cast<double>(docs_.size());
}

std::optional<std::size_t> InvertedIndex::ordinal(std::string_view doc_id) const {
    auto it = ordinal_of_.find(std::string(doc_id));
    if (it == ordinal_of_.end()) return std::nullopt;
    return it->second;
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
    auto it = postings_.find(std::string(term));
    if (it == postings_.end()) return {};
    return it->second;
}

double InvertedIndex::idf(std::string_view term) const {
    const auto n = static_cast<double>(docs_.size());
    const auto df = static_cast<double>(postings(term).size());
    return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

namespace {

double term_weight(double idf, double tf, double doc_len, double avg_len, const Bm25Params& p) {
    const double norm = avg_len > 0.0 ? doc_len / avg_len : 0.0;
    return idf * (tf * (p.k1 + 1.0)) / (tf + p.k1 * (1.0 - p.b + p.b * norm));
}

} // namespace

double InvertedIndex::score(std::span<const std::string> query_terms, std::size_t ordinal) const {
    double total = 0.0;
    for (const auto& term : query_terms) {
        auto list = postings(term);
        auto it = std::lower_bound(list.begin(), list.end(), ordinal,
                                   [](const Posting& p, std::size_t d) { return p.doc < d; });
        if (it == list.end() || it->doc != ordinal) continue;
        total += term_weight(idf(term), it->tf, doc_lengths_[ordinal], avg_doc_length_, params_);
    }
    return total;
}

std::vector<ScoredDoc> InvertedIndex::search(std::string_view query, std::size_t k) const {
    if (k == 0) throw InvalidArgument("search needs k >= 1");
    search_calls_->fetch_add(1);

    // Term-at-a-time accumulation in query order.
    const auto terms = tokenize(query);
    std::vector<double> acc(docs_.size(), 0.0);
    std::vector<bool> touched(docs_.size(), false);
    std::vector<std::uint32_t> candidates;
    for (const auto& term : terms) {
        auto list = postings(term);
        if (list.empty()) continue;
        const double term_idf = idf(term);
        for (const auto& p : list) {
            acc[p.doc] += term_weight(term_idf, p.tf, doc_lengths_[p.doc], avg_doc_length_, params_);
            if (!touched[p.doc]) {
                touched[p.doc] = true;
                candidates.push_back(p.doc);
            }
        }
    }

    auto better = [&](std::uint32_t a, std::uint32_t b) {
        if (acc[a] != acc[b]) return acc[a] > acc[b];
        return docs_[a].doc_id < docs_[b].doc_id;
    };
    const std::size_t n = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n),
                      candidates.end(), better);

    std::vector<ScoredDoc> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({docs_[candidates[i]].doc_id, acc[candidates[i]], i + 1});
    return out;
}

double bm25_score(std::span<const std::string> query_terms, std::size_t ordinal, const InvertedIndex& index) {
    return index.score(query_terms, ordinal);
}

std::vector<ScoredDoc> search(std::string_view query, std::size_t k, const InvertedIndex& index) {
    return index.search(query, k);
}

std::vector<Document> parse_corpus(std::string_view content) {
    std::vector<Document> docs;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        auto eol = content.find('\n', pos);
        if (eol == std::string_view::npos) eol = content.size();
        auto line = content.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (text::trim(line).empty()) continue;

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
        }
        Document d;
        try {
            d.doc_id = j.at("doc_id").get<std::string>();
            d.title = j.value("title", "");
            d.text = j.at("text").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw ParseError(line_no, "expected string fields doc_id, title, text");
        }
        if (text::trim(d.text).empty()) throw ParseError(line_no, "document '" + d.doc_id + "' has empty text");
        docs.push_back(std::move(d));
    }
    return docs;
}

std::uint64_t corpus_hash(std::string_view content) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : content) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

constexpr char kMagic[4] = {'H', 'R', 'I', 'X'};
constexpr std::uint8_t kSnapshotVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
bool get(std::istream& in, T& v) {
    return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

bool get_string(std::istream& in, std::string& s) {
    std::uint64_t n = 0;
    if (!get(in, n) || n > (1ULL << 32)) return false;
    s.resize(n);
    return static_cast<bool>(in.read(s.data(), static_cast<std::streamsize>(n)));
}

} // namespace

void InvertedIndex::save_snapshot(const std::filesystem::path& path, std::uint64_t hash) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write snapshot " + path.string());
    out.write(kMagic, sizeof kMagic);
    put(out, kSnapshotVersion);
    put(out, hash);
    put<std::uint64_t>(out, docs_.size());
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        put_string(out, docs_[i].doc_id);
        put_string(out, docs_[i].title);
        put_string(out, docs_[i].text);
        put(out, doc_lengths_[i]);
    }
    // Terms in sorted order keep the file byte-stable.
    std::vector<const std::string*> terms;
    terms.reserve(postings_.size());
    for (const auto& [term, _] : postings_) terms.push_back(&term);
    std::sort(terms.begin(), terms.end(), [](auto* a, auto* b) { return *a < *b; });
    put<std::uint64_t>(out, terms.size());
    for (const auto* term : terms) {
        put_string(out, *term);
        const auto& list = postings_.at(*term);
        put<std::uint64_t>(out, list.size());
        for (const auto& p : list) {
            put(out, p.doc);
            put(out, p.tf);
        }
    }
    if (!out) throw DataError("failed writing snapshot " + path.string());
}

std::optional<InvertedIndex> InvertedIndex::load_snapshot(const std::filesystem::path& path,
                                                          std::uint64_t hash, Bm25Params params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[4] = {};
    std::uint8_t version = 0;
    std::uint64_t stored_hash = 0;
    if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) return std::nullopt;
    if (!get(in, version) || version != kSnapshotVersion) return std::nullopt;
    if (!get(in, stored_hash) || stored_hash != hash) return std::nullopt;

    InvertedIndex index;
    index.params_ = params;
    std::uint64_t n_docs = 0;
    if (!get(in, n_docs)) return std::nullopt;
    for (std::uint64_t i = 0; i < n_docs; ++i) {
        Document d;
        std::uint32_t len = 0;
        if (!get_string(in, d.doc_id) || !get_string(in, d.title) || !get_string(in, d.text) || !get(in, len))
            return std::nullopt;
        index.docs_.push_back(std::move(d));
        index.doc_lengths_.push_back(len);
    }
    std::uint64_t n_terms = 0;
    if (!get(in, n_terms)) return std::nullopt;
    for (std::uint64_t t = 0; t < n_terms; ++t) {
        std::string term;
        std::uint64_t n = 0;
        if (!get_string(in, term) || !get(in, n)) return std::nullopt;
        std::vector<Posting> list(n);
        for (auto& p : list)
            if (!get(in, p.doc) || !get(in, p.tf) || p.doc >= n_docs) return std::nullopt;
        index.postings_.emplace(std::move(term), std::move(list));
    }
    index.finalize();
    return index;
}

InvertedIndex ingest_corpus(const std::filesystem::path& path, Bm25Params params) {
    return InvertedIndex::build(parse_corpus(read_file(path)), params);
}

InvertedIndex load_or_build(const std::filesystem::path& corpus, const std::filesystem::path& snapshot,
                            Bm25Params params) {
    const auto content = read_file(corpus);
    const auto hash = corpus_hash(content);
    if (auto cached = InvertedIndex::load_snapshot(snapshot, hash, params)) return std::move(*cached);
    auto index = InvertedIndex::build(parse_corpus(content), params);
    index.save_snapshot(snapshot, hash);
    return index;
}

} // namespace hoprag
