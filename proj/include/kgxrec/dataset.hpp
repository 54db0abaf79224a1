#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kgxrec/encode.hpp"
#include "kgxrec/graph.hpp"
#include "kgxrec/vocab.hpp"

namespace kgxrec {

// One dataset line: user_id \t item_id \t rating \t explanation \t triples,
// with triples as semicolon-separated "head|relation|tail". '|', ';' and tab
// are forbidden inside names.
struct RawTriple {
    std::string head, relation, tail;
};

struct DatasetRecord {
    std::string user_id;
    std::string item_id;
    double rating = 0.0;
    std::string explanation;
    std::vector<RawTriple> triples;
};

DatasetRecord parse_record(const std::string& line);
std::string format_record(const DatasetRecord& r);

struct LoadStats {
    size_t total_lines = 0;
    size_t malformed = 0;
};

std::vector<DatasetRecord> load_records(const std::filesystem::path& path, LoadStats* stats = nullptr);
void write_records(const std::filesystem::path& path, const std::vector<DatasetRecord>& records);

struct SplitRatios {
    double train = 0.6, valid = 0.2, test = 0.2;
    void validate() const;
};

struct DatasetSplit {
    std::vector<DatasetRecord> train, valid, test;
};

// Deterministic split, grouped by item id so test items can be unseen during
// training. Target record counts come from largest-remainder apportionment of
// the ratios.
DatasetSplit split_dataset(const std::vector<DatasetRecord>& records, const SplitRatios& ratios,
                           uint64_t seed);

// A record joined with the user's purchase history (names of the user's other
// items across the corpus, most recent `max_user_size` kept).
struct Example {
    std::string user_id, item_id;
    UserHistory user;
    ItemKG kg;
    double rating = 0.0;
    std::string explanation;
};

std::vector<Example> assemble_examples(const std::vector<DatasetRecord>& split_records,
                                       const std::vector<DatasetRecord>& all_records,
                                       const Tokenizer& tokenizer, const Limits& limits,
                                       size_t* dropped = nullptr);

// Model-ready example: linearized input plus teacher-forcing target ids.
struct EncodedExample {
    EncodedSequence seq;
    double rating = 0.0;
    std::vector<int32_t> expl_ids;
    std::string reference_explanation;
    ItemKG kg;
};

EncodedExample encode_example(const Example& ex, const Vocabulary& vocab, const Tokenizer& tokenizer,
                              const Limits& limits, size_t max_explanation_len);

std::vector<EncodedExample> encode_examples(const std::vector<Example>& examples, const Vocabulary& vocab,
                                            const Tokenizer& tokenizer, const Limits& limits,
                                            size_t max_explanation_len);

// Vocabulary over a training split: explanation tokens plus all graph-side
// name tokens.
Vocabulary build_vocabulary(const std::vector<Example>& train_examples, const Tokenizer& tokenizer,
                            size_t cap = 0);

}  // namespace kgxrec
