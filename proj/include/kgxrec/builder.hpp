#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kgxrec/dataset.hpp"
#include "kgxrec/graph.hpp"

namespace kgxrec::builder {

// Deterministic entity linker: surface form -> (canonical id, type label).
// Lookup is case-insensitive greedy longest-match over normalized tokens.
// Stands in for an external entity-linking service so corpus construction is
// hermetic and reproducible.
class Gazetteer {
public:
    struct Entry {
        std::vector<std::string> surface;  // normalized tokens
        std::string canonical;
        std::string type;
    };

    void add(const std::string& surface, const std::string& canonical, const std::string& type);
    static Gazetteer load(const std::filesystem::path& path);  // TSV: surface, canonical, type

    const Entry* find(const std::vector<std::string>& tokens, size_t pos, size_t* match_len) const;
    size_t size() const { return entries_.size(); }
    size_t max_surface_len() const { return max_len_; }

private:
    std::vector<Entry> entries_;
    // Index from first surface token to candidate entries, longest first.
    std::unordered_map<std::string, std::vector<size_t>> by_first_token_;
    size_t max_len_ = 0;
};

struct Mention {
    size_t begin = 0, end = 0;  // token positions in the normalized text
    std::string surface;        // normalized surface form, space joined
    std::string canonical;
    std::string type;
};

// Non-overlapping mentions by greedy longest-match, left to right.
std::vector<Mention> extract_entities(const std::string& description, const Gazetteer& gazetteer);

struct BuiltRecord {
    ItemKG kg;
    std::string explanation;
};

// KG = one (item, type(e), e) triple per unique mention surface form;
// explanation = the description's sentences that contain at least one mention,
// in their original order. Returns nothing when the description has no
// mentions (the record is dropped).
std::optional<BuiltRecord> build_record(const std::string& item_id, const std::string& item_name,
                                        const std::string& description, const Gazetteer& gazetteer,
                                        const Limits& limits = {});

struct CorpusStats {
    size_t users = 0;
    size_t items = 0;
    size_t interactions = 0;
    size_t entities = 0;
    size_t relations = 0;
    size_t triples = 0;
    double mean_ec = 0.0;           // percent
    double mean_words_per_sample = 0.0;

    std::string to_tsv() const;
};

CorpusStats dataset_stats(const std::vector<DatasetRecord>& records);

}  // namespace kgxrec::builder
