#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace hoprag {

enum class MemorySource { Extraction, Retrieval };

std::string_view to_string(MemorySource s);

struct MemoryRecord {
    std::string key; ///< case-folded, whitespace-normalized surface
    std::string surface;
    std::optional<std::string> relation;
    double confidence = 0.0;
    std::size_t hop_added = 0;
    MemorySource source = MemorySource::Extraction;

    friend bool operator==(const MemoryRecord&, const MemoryRecord&) = default;
};

/// Builds a record whose key is derived from `surface`.
MemoryRecord make_memory_record(std::string surface, std::optional<std::string> relation,
                                double confidence, std::size_t hop, MemorySource source);

/// Per-question fact store. One record per key, insertion order preserved;
/// a key's confidence is the maximum ever observed for it.
class MemoryStore {
public:
    /// A new key is appended. For a known key the confidence becomes
    /// max(old, new); surface and relation follow the strictly more confident
    /// observation; hop_added and source stay.
    void upsert(MemoryRecord record);

    const std::vector<MemoryRecord>& records() const noexcept { return records_; }
    const MemoryRecord* find(std::string_view key) const;
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    friend bool operator==(const MemoryStore& a, const MemoryStore& b) { return a.records_ == b.records_; }

private:
    std::vector<MemoryRecord> records_;
    std::unordered_map<std::string, std::size_t> slot_;
};

/// `- <surface> (<relation>)` lines in descending confidence (ties by
/// insertion order), cut to the longest whole-line prefix of at most
/// `budget_bytes` bytes. Every line ends in '\n'.
std::string memory_render(const MemoryStore& store, std::size_t budget_bytes);

nlohmann::ordered_json memory_to_json(const MemoryStore& store);

} // namespace hoprag
