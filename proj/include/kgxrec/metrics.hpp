#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kgxrec/graph.hpp"

namespace kgxrec::metrics {

// All text metrics share one normalization: lowercase, whitespace split,
// punctuation stripped at token boundaries.
std::vector<std::string> normalize_tokens(const std::string& text);

// Corpus-level BLEU with modified n-gram precision, geometric mean over
// n = 1..max_n and brevity penalty. Zero match counts are add-epsilon smoothed
// so short desk-scale texts never zero the whole geometric mean. Percent.
double bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
            int max_n);

struct RougeScore {
    double f = 0.0, r = 0.0, p = 0.0;  // percent
};

struct RougeReport {
    RougeScore rouge2, rougeL;
};

// ROUGE-2 from clipped bigram overlap, ROUGE-L from the longest common
// subsequence; computed per pair, macro-averaged.
RougeReport rouge(const std::vector<std::string>& candidates, const std::vector<std::string>& references);

// Unique sentence ratio: distinct normalized candidates / candidates. [0, 1].
double usr(const std::vector<std::string>& candidates);

enum class CoverageMode {
    ContiguousSurface,  // entity counts when its full token sequence appears contiguously
    PerTokenRecall,     // fraction of the entity's tokens that appear anywhere
};

// Recall of the KG's unique entities (center + tails, deduplicated by
// normalized surface form) in the explanation. [0, 1].
double entity_coverage(const ItemKG& kg, const std::string& explanation,
                       CoverageMode mode = CoverageMode::ContiguousSurface);

double entity_coverage(const std::vector<std::string>& entity_names, const std::string& explanation,
                       CoverageMode mode = CoverageMode::ContiguousSurface);

std::pair<double, double> rmse_mae(const std::vector<double>& predictions,
                                   const std::vector<double>& truths);

// BLEU/ROUGE/EC in percent, USR in [0, 1], RMSE/MAE raw.
struct MetricsReport {
    double bleu1 = 0.0, bleu4 = 0.0;
    double usr = 0.0;
    double rouge2_f = 0.0, rouge2_r = 0.0, rouge2_p = 0.0;
    double rougeL_f = 0.0, rougeL_r = 0.0, rougeL_p = 0.0;
    double ec = 0.0;
    double rmse = 0.0, mae = 0.0;

    std::string to_tsv() const;    // single tab-separated line, field order above
    std::string to_table() const;  // human-readable
};

}  // namespace kgxrec::metrics
