#include "kgxrec/builder.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_set>

#include "kgxrec/error.hpp"
#include "kgxrec/metrics.hpp"
#include "kgxrec/text.hpp"

namespace kgxrec::builder {

void Gazetteer::add(const std::string& surface, const std::string& canonical, const std::string& type) {
    Entry e;
    e.surface = text::word_tokens(surface);
    if (e.surface.empty()) throw DataError("gazetteer surface form is empty: '" + surface + "'");
    if (canonical.empty() || type.empty())
        throw DataError("gazetteer entry for '" + surface + "' needs a canonical id and a type");
    e.canonical = canonical;
    e.type = type;
    max_len_ = std::max(max_len_, e.surface.size());
    by_first_token_[e.surface[0]].push_back(entries_.size());
    entries_.push_back(std::move(e));
    // Longest surface first so greedy matching prefers "new york" over "york".
    auto& bucket = by_first_token_[entries_.back().surface[0]];
    std::sort(bucket.begin(), bucket.end(), [this](size_t a, size_t b) {
        return entries_[a].surface.size() > entries_[b].surface.size();
    });
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open gazetteer file " + path.string());
    Gazetteer g;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields = text::split(line, '\t');
        if (fields.size() != 3)
            throw DataError(path.string() + ":" + std::to_string(lineno) +
                            ": expected 3 tab-separated fields");
        g.add(fields[0], fields[1], fields[2]);
    }
    return g;
}

const Gazetteer::Entry* Gazetteer::find(const std::vector<std::string>& tokens, size_t pos,
                                        size_t* match_len) const {
    auto it = by_first_token_.find(tokens[pos]);
    if (it == by_first_token_.end()) return nullptr;
    for (size_t idx : it->second) {
        const Entry& e = entries_[idx];
        if (pos + e.surface.size() > tokens.size()) continue;
        bool hit = true;
        for (size_t j = 1; j < e.surface.size(); ++j) {
            if (tokens[pos + j] != e.surface[j]) {
                hit = false;
                break;
            }
        }
        if (hit) {
            *match_len = e.surface.size();
            return &e;
        }
    }
    return nullptr;
}

std::vector<Mention> extract_entities(const std::string& description, const Gazetteer& gazetteer) {
    const std::vector<std::string> tokens = text::word_tokens(description);
    std::vector<Mention> out;
    size_t i = 0;
    while (i < tokens.size()) {
        size_t len = 0;
        const Gazetteer::Entry* e = gazetteer.find(tokens, i, &len);
        if (e == nullptr) {
            ++i;
            continue;
        }
        Mention m;
        m.begin = i;
        m.end = i + len;
        m.surface = text::join(e->surface);
        m.canonical = e->canonical;
        m.type = e->type;
        out.push_back(std::move(m));
        i += len;
    }
    return out;
}

std::optional<BuiltRecord> build_record(const std::string& item_id, const std::string& item_name,
                                        const std::string& description, const Gazetteer& gazetteer,
                                        const Limits& limits) {
    const std::vector<std::string> sentences = text::split_sentences(description);

    std::vector<std::string> kept;
    std::vector<Triple> triples;
    std::set<std::string> seen_surfaces;
    for (const std::string& sentence : sentences) {
        std::vector<Mention> mentions = extract_entities(sentence, gazetteer);
        if (mentions.empty()) continue;
        kept.push_back(sentence);
        for (const Mention& m : mentions) {
            if (!seen_surfaces.insert(m.surface).second) continue;
            triples.push_back(
                {text::word_tokens(m.type), text::word_tokens(m.surface)});
        }
    }
    if (triples.empty()) return std::nullopt;

    BuiltRecord rec;
    rec.kg = make_item_kg(make_item(item_id, text::word_tokens(item_name)), std::move(triples), limits);
    rec.explanation = text::join(kept);
    return rec;
}

std::string CorpusStats::to_tsv() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%zu\t%zu\t%zu\t%zu\t%zu\t%zu\t%.4f\t%.4f", users, items,
                  interactions, entities, relations, triples, mean_ec, mean_words_per_sample);
    return buf;
}

CorpusStats dataset_stats(const std::vector<DatasetRecord>& records) {
    if (records.empty()) throw DataError("dataset_stats: no records");
    CorpusStats stats;
    std::unordered_set<std::string> users, items;
    std::set<std::string> entities, relations;
    double ec_sum = 0.0, words_sum = 0.0;
    size_t kg_triples = 0;
    std::unordered_set<std::string> counted_items;  // KG-level stats count each item once
    for (const DatasetRecord& r : records) {
        users.insert(r.user_id);
        items.insert(r.item_id);
        if (counted_items.insert(r.item_id).second) {
            kg_triples += r.triples.size();
            entities.insert(text::join(metrics::normalize_tokens(r.triples[0].head)));
            for (const RawTriple& t : r.triples) {
                entities.insert(text::join(metrics::normalize_tokens(t.tail)));
                relations.insert(text::join(metrics::normalize_tokens(t.relation)));
            }
        }
        std::vector<std::string> names;
        names.push_back(r.triples[0].head);
        for (const RawTriple& t : r.triples) names.push_back(t.tail);
        ec_sum += metrics::entity_coverage(names, r.explanation);
        words_sum += static_cast<double>(metrics::normalize_tokens(r.explanation).size());
    }
    stats.users = users.size();
    stats.items = items.size();
    stats.interactions = records.size();
    stats.entities = entities.size();
    stats.relations = relations.size();
    stats.triples = kg_triples;
    stats.mean_ec = 100.0 * ec_sum / static_cast<double>(records.size());
    stats.mean_words_per_sample = words_sum / static_cast<double>(records.size());
    return stats;
}

}  // namespace kgxrec::builder
