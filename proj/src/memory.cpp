#include "hoprag/memory.hpp"

#include <algorithm>
#include <numeric>

#include "hoprag/text.hpp"

namespace hoprag {

std::string_view to_string(MemorySource s) {
    return s == MemorySource::Extraction ? "extraction" : "retrieval";
}

MemoryRecord make_memory_record(std::string surface, std::optional<std::string> relation,
                                double confidence, std::size_t hop, MemorySource source) {
    MemoryRecord r;
    r.key = text::entity_key(surface);
    r.surface = std::move(surface);
    r.relation = std::move(relation);
    r.confidence = confidence;
    r.hop_added = hop;
    r.source = source;
    return r;
}

void MemoryStore::upsert(MemoryRecord record) {
    auto it = slot_.find(record.key);
    if (it == slot_.end()) {
        slot_.emplace(record.key, records_.size());
        records_.push_back(std::move(record));
        return;
    }
    auto& existing = records_[it->second];
    if (record.confidence > existing.confidence) {
        existing.confidence = record.confidence;
        existing.surface = std::move(record.surface);
        existing.relation = std::move(record.relation);
    }
}

const MemoryRecord* MemoryStore::find(std::string_view key) const {
    auto it = slot_.find(std::string(key));
    return it == slot_.end() ? nullptr : &records_[it->second];
}

std::string memory_render(const MemoryStore& store, std::size_t budget_bytes) {
    const auto& recs = store.records();
    std::vector<std::size_t> order(recs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&recs](std::size_t a, std::size_t b) {
        return recs[a].confidence > recs[b].confidence;
    });

    std::string out;
    for (auto i : order) {
        std::string line = "- " + recs[i].surface;
        if (recs[i].relation) line += " (" + *recs[i].relation + ")";
        line += '\n';
        if (out.size() + line.size() > budget_bytes) break;
        out += line;
    }
    return out;
}

nlohmann::ordered_json memory_to_json(const MemoryStore& store) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : store.records()) {
        nlohmann::ordered_json j{{"key", r.key}, {"surface", r.surface}};
        j["relation"] = r.relation ? nlohmann::ordered_json(*r.relation) : nlohmann::ordered_json(nullptr);
        j["confidence"] = r.confidence;
        j["hop_added"] = r.hop_added;
        j["source"] = to_string(r.source);
        arr.push_back(std::move(j));
    }
    return arr;
}

} // namespace hoprag
