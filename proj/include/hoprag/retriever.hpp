#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hoprag {

struct Document {
    std::string doc_id;
    std::string title;
    std::string text;

    friend bool operator==(const Document&, const Document&) = default;
};

struct Posting {
    std::uint32_t doc = 0; ///< ordinal in ingestion order
    std::uint32_t tf = 0;

    friend bool operator==(const Posting&, const Posting&) = default;
};

/// Okapi BM25 parameters.
struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;
    std::size_t rank = 0; ///< 1-based
};

/// Case-folded alphanumeric runs; no stemming, no stopwords.
std::vector<std::string> tokenize(std::string_view text);

/// In-memory inverted index over title + " " + text of each document.
/// Immutable after construction; concurrent searches are safe.
class InvertedIndex {
public:
    /// Throws DuplicateKey on a repeated doc_id and DataError on empty text.
    static InvertedIndex build(std::vector<Document> docs, Bm25Params params = {});

    InvertedIndex(InvertedIndex&&) noexcept = default;
    InvertedIndex& operator=(InvertedIndex&&) noexcept = default;

    std::size_t doc_count() const noexcept { return docs_.size(); }
    double avg_doc_length() const noexcept { return avg_doc_length_; }
    const Bm25Params& params() const noexcept { return params_; }
    void set_params(Bm25Params p) noexcept { params_ = p; }

    const Document& document(std::size_t ordinal) const { return docs_.at(ordinal); }
    const std::vector<Document>& documents() const noexcept { return docs_; }
    std::uint32_t doc_length(std::size_t ordinal) const { return doc_lengths_.at(ordinal); }
    std::optional<std::size_t> ordinal(std::string_view doc_id) const;

    /// Sorted by doc ordinal; empty for unknown terms.
    std::span<const Posting> postings(std::string_view term) const;
    std::size_t term_count() const noexcept { return postings_.size(); }

    /// ln((N - df + 0.5) / (df + 0.5) + 1), never negative.
    double idf(std::string_view term) const;

    /// BM25 of one document; each query term counts once per occurrence.
    double score(std::span<const std::string> query_terms, std::size_t ordinal) const;

    /// Top-k by score descending, ties by ascending doc_id, over every document
    /// sharing at least one term with the query. Throws InvalidArgument for k == 0.
    std::vector<ScoredDoc> search(std::string_view query, std::size_t k) const;

    /// Number of search() calls served so far.
    std::size_t search_calls() const noexcept { return search_calls_->load(); }

    void save_snapshot(const std::filesystem::path& path, std::uint64_t corpus_hash) const;

    /// nullopt when the file is missing, from another format version, or
    /// built from a different corpus.
    static std::optional<InvertedIndex> load_snapshot(const std::filesystem::path& path,
                                                      std::uint64_t corpus_hash,
                                                      Bm25Params params = {});

private:
    InvertedIndex() = default;
    void finalize();

    std::vector<Document> docs_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    std::unordered_map<std::string, std::size_t> ordinal_of_;
    std::vector<std::uint32_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
    Bm25Params params_;
    std::unique_ptr<std::atomic<std::size_t>> search_calls_ = std::make_unique<std::atomic<std::size_t>>(0);
};

double bm25_score(std::span<const std::string> query_terms, std::size_t ordinal, const InvertedIndex& index);

std::vector<ScoredDoc> search(std::string_view query, std::size_t k, const InvertedIndex& index);

/// Newline-delimited {doc_id, title, text} records; ParseError carries the line.
std::vector<Document> parse_corpus(std::string_view content);

std::uint64_t corpus_hash(std::string_view content);

InvertedIndex ingest_corpus(const std::filesystem::path& path, Bm25Params params = {});

/// Uses the snapshot when it matches the corpus, otherwise rebuilds and
/// rewrites it.
InvertedIndex load_or_build(const std::filesystem::path& corpus, const std::filesystem::path& snapshot,
                            Bm25Params params = {});

} // namespace hoprag
