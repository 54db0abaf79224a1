#include "kgxrec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "kgxrec/error.hpp"
#include "kgxrec/log.hpp"
#include "kgxrec/rng.hpp"
#include "kgxrec/text.hpp"

namespace kgxrec {

namespace {

void check_name_field(const std::string& s, const char* what) {
    if (s.empty()) throw DataError(std::string(what) + " is empty");
    if (s.find_first_of("|;\t") != std::string::npos)
        throw DataError(std::string(what) + " contains a forbidden character: " + s);
}

}  // namespace

DatasetRecord parse_record(const std::string& line) {
    std::vector<std::string> fields = text::split(line, '\t');
    if (fields.size() != 5) throw DataError("expected 5 tab-separated fields, got " +
                                            std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty()) throw DataError("empty user or item id");
    double rating = 0.0;
    try {
        size_t pos = 0;
        rating = std::stod(fields[2], &pos);
        if (pos != fields[2].size()) throw DataError("trailing characters in rating");
    } catch (const std::exception&) {
        throw DataError("unparseable rating: " + fields[2]);
    }
    Interaction interaction = make_interaction(fields[0], fields[1], rating, fields[3]);
    DatasetRecord r;
    r.user_id = std::move(interaction.user_id);
    r.item_id = std::move(interaction.item_id);
    r.rating = interaction.rating;
    r.explanation = std::move(interaction.explanation);
    for (const std::string& part : text::split(fields[4], ';')) {
        if (part.empty()) continue;
        std::vector<std::string> t = text::split(part, '|');
        if (t.size() != 3) throw DataError("malformed triple: " + part);
        for (const std::string& f : t)
            if (f.empty()) throw DataError("triple with empty field: " + part);
        r.triples.push_back({t[0], t[1], t[2]});
    }
    if (r.triples.empty()) throw DataError("record without triples");
    const std::string& head = r.triples[0].head;
    for (const RawTriple& t : r.triples)
        if (t.head != head) throw DataError("triples disagree on the center item name");
    return r;
}

std::string format_record(const DatasetRecord& r) {
    check_name_field(r.user_id, "user id");
    check_name_field(r.item_id, "item id");
    if (r.explanation.find('\t') != std::string::npos || r.explanation.find('\n') != std::string::npos)
        throw DataError("explanation contains a tab or newline");
    if (r.triples.empty()) throw DataError("record without triples");
    std::string out = r.user_id + '\t' + r.item_id + '\t';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", r.rating);
    out += buf;
    out += '\t';
    out += r.explanation;
    out += '\t';
    for (size_t i = 0; i < r.triples.size(); ++i) {
        const RawTriple& t = r.triples[i];
        check_name_field(t.head, "triple head");
        check_name_field(t.relation, "triple relation");
        check_name_field(t.tail, "triple tail");
        if (i > 0) out += ';';
        out += t.head + '|' + t.relation + '|' + t.tail;
    }
    return out;
}

std::vector<DatasetRecord> load_records(const std::filesystem::path& path, LoadStats* stats) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file " + path.string());
    std::vector<DatasetRecord> out;
    std::string line;
    size_t lineno = 0, malformed = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(parse_record(line));
        } catch (const DataError& e) {
            ++malformed;
            log::warn(path.string() + ":" + std::to_string(lineno) + ": skipped record: " + e.what());
        }
    }
    if (stats != nullptr) {
        stats->total_lines = lineno;
        stats->malformed = malformed;
    }
    return out;
}

void write_records(const std::filesystem::path& path, const std::vector<DatasetRecord>& records) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file " + path.string());
    for (const DatasetRecord& r : records) out << format_record(r) << '\n';
}

void SplitRatios::validate() const {
    if (train < 0 || valid < 0 || test < 0 || std::abs(train + valid + test - 1.0) > 1e-9)
        throw ConfigError("split ratios must be non-negative and sum to 1");
}

DatasetSplit split_dataset(const std::vector<DatasetRecord>& records, const SplitRatios& ratios,
                           uint64_t seed) {
    ratios.validate();
    if (records.size() < 3) throw DataError("need at least 3 records to split");

    // Group record indices by item, shuffle the items, then fill the splits to
    // largest-remainder targets with whole item groups.
    std::vector<std::string> items;
    std::unordered_map<std::string, std::vector<size_t>> by_item;
    for (size_t i = 0; i < records.size(); ++i) {
        auto [it, inserted] = by_item.try_emplace(records[i].item_id);
        if (inserted) items.push_back(records[i].item_id);
        it->second.push_back(i);
    }
    nn::Rng rng(seed);
    rng.shuffle(items);

    const double n = static_cast<double>(records.size());
    const double want[3] = {ratios.train * n, ratios.valid * n, ratios.test * n};
    size_t target[3];
    double frac[3];
    size_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
        target[s] = static_cast<size_t>(std::floor(want[s]));
        frac[s] = want[s] - std::floor(want[s]);
        assigned += target[s];
    }
    while (assigned < records.size()) {
        int best = 0;
        for (int s = 1; s < 3; ++s)
            if (frac[s] > frac[best]) best = s;
        ++target[best];
        frac[best] = -1.0;
        ++assigned;
    }

    DatasetSplit split;
    std::vector<DatasetRecord>* outs[3] = {&split.train, &split.valid, &split.test};
    int current = 0;
    for (const std::string& item : items) {
        while (current < 2 && outs[current]->size() >= target[current]) ++current;
        for (size_t idx : by_item[item]) outs[current]->push_back(records[idx]);
    }
    if (split.train.empty() || split.valid.empty() || split.test.empty())
        throw DataError("degenerate split: every part needs at least one record");
    return split;
}

std::vector<Example> assemble_examples(const std::vector<DatasetRecord>& split_records,
                                       const std::vector<DatasetRecord>& all_records,
                                       const Tokenizer& tokenizer, const Limits& limits,
                                       size_t* dropped) {
    // Item names come from the head field of each item's first record; user
    // histories from the corpus-wide interaction order.
    std::unordered_map<std::string, std::string> item_name;
    std::unordered_map<std::string, std::vector<std::string>> user_items;
    for (const DatasetRecord& r : all_records) {
        item_name.try_emplace(r.item_id, r.triples[0].head);
        auto& items = user_items[r.user_id];
        if (std::find(items.begin(), items.end(), r.item_id) == items.end())
            items.push_back(r.item_id);
    }

    std::vector<Example> out;
    size_t drop_count = 0;
    for (const DatasetRecord& r : split_records) {
        std::vector<Item> purchases;
        for (const std::string& other : user_items[r.user_id]) {
            if (other == r.item_id) continue;
            purchases.push_back(make_item(other, tokenizer.tokenize(item_name[other])));
        }
        if (purchases.empty()) {
            // Users without any other purchase are the cold-start case; skip.
            ++drop_count;
            log::debug("dropping record for cold user '" + r.user_id + "'");
            continue;
        }
        std::vector<Triple> triples;
        for (const RawTriple& t : r.triples)
            triples.push_back({tokenizer.tokenize(t.relation), tokenizer.tokenize(t.tail)});
        Example ex;
        ex.user_id = r.user_id;
        ex.item_id = r.item_id;
        try {
            ex.user = make_user_history(r.user_id, std::move(purchases), limits);
            ex.kg = make_item_kg(make_item(r.item_id, tokenizer.tokenize(r.triples[0].head)),
                                 std::move(triples), limits);
        } catch (const DataError& e) {
            ++drop_count;
            log::warn("dropping record " + r.user_id + "/" + r.item_id + ": " + e.what());
            continue;
        }
        ex.rating = r.rating;
        ex.explanation = r.explanation;
        out.push_back(std::move(ex));
    }
    if (dropped != nullptr) *dropped = drop_count;
    return out;
}

EncodedExample encode_example(const Example& ex, const Vocabulary& vocab, const Tokenizer& tokenizer,
                              const Limits& limits, size_t max_explanation_len) {
    EncodedExample enc;
    enc.seq = linearize(UserItemGraph::build(ex.user, ex.kg), vocab, limits);
    enc.rating = ex.rating;
    std::vector<std::string> expl_tokens = tokenizer.tokenize(ex.explanation);
    if (expl_tokens.size() > max_explanation_len) expl_tokens.resize(max_explanation_len);
    if (expl_tokens.empty()) throw DataError("explanation tokenizes to nothing");
    enc.expl_ids = vocab.ids(expl_tokens);
    enc.reference_explanation = ex.explanation;
    enc.kg = ex.kg;
    return enc;
}

std::vector<EncodedExample> encode_examples(const std::vector<Example>& examples, const Vocabulary& vocab,
                                            const Tokenizer& tokenizer, const Limits& limits,
                                            size_t max_explanation_len) {
    std::vector<EncodedExample> out;
    out.reserve(examples.size());
    for (const Example& ex : examples)
        out.push_back(encode_example(ex, vocab, tokenizer, limits, max_explanation_len));
    return out;
}

Vocabulary build_vocabulary(const std::vector<Example>& train_examples, const Tokenizer& tokenizer,
                            size_t cap) {
    std::vector<std::vector<std::string>> streams;
    for (const Example& ex : train_examples) {
        streams.push_back(tokenizer.tokenize(ex.explanation));
        for (const Item& p : ex.user.purchases) streams.push_back(p.name);
        streams.push_back(ex.kg.center.name);
        for (const Triple& t : ex.kg.triples) {
            streams.push_back(t.relation);
            streams.push_back(t.tail);
        }
    }
    return Vocabulary::build(streams, cap);
}

}  // namespace kgxrec
