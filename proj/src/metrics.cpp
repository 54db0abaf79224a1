#include "kgxrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "kgxrec/error.hpp"
#include "kgxrec/text.hpp"

namespace kgxrec::metrics {

namespace {

constexpr double kBleuEpsilon = 1e-9;

using Tokens = std::vector<std::string>;
using NgramCounts = std::map<std::vector<std::string>, size_t>;

NgramCounts count_ngrams(const Tokens& tokens, size_t n) {
    NgramCounts counts;
    if (tokens.size() < n) return counts;
    for (size_t i = 0; i + n <= tokens.size(); ++i)
        ++counts[std::vector<std::string>(tokens.begin() + static_cast<long>(i),
                                          tokens.begin() + static_cast<long>(i + n))];
    return counts;
}

size_t lcs_length(const Tokens& a, const Tokens& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (size_t i = 1; i <= a.size(); ++i) {
        for (size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

RougeScore prf(double matches, double ref_total, double cand_total) {
    RougeScore s;
    s.r = ref_total > 0 ? 100.0 * matches / ref_total : 0.0;
    s.p = cand_total > 0 ? 100.0 * matches / cand_total : 0.0;
    s.f = (s.r + s.p) > 0 ? 2.0 * s.r * s.p / (s.r + s.p) : 0.0;
    return s;
}

bool contains_contiguous(const Tokens& haystack, const Tokens& needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        bool hit = true;
        for (size_t j = 0; j < needle.size(); ++j) {
            if (haystack[i + j] != needle[j]) {
                hit = false;
                break;
            }
        }
        if (hit) return true;
    }
    return false;
}

}  // namespace

std::vector<std::string> normalize_tokens(const std::string& s) { return text::word_tokens(s); }

double bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
            int max_n) {
    if (candidates.size() != references.size())
        throw DataError("bleu: candidate/reference count mismatch");
    if (candidates.empty() || max_n < 1) return 0.0;

    std::vector<Tokens> cand_tokens, ref_tokens;
    cand_tokens.reserve(candidates.size());
    ref_tokens.reserve(references.size());
    size_t cand_len = 0, ref_len = 0;
    for (size_t i = 0; i < candidates.size(); ++i) {
        cand_tokens.push_back(normalize_tokens(candidates[i]));
        ref_tokens.push_back(normalize_tokens(references[i]));
        cand_len += cand_tokens.back().size();
        ref_len += ref_tokens.back().size();
    }

    double log_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        double matched = 0.0, total = 0.0;
        for (size_t i = 0; i < cand_tokens.size(); ++i) {
            NgramCounts cand = count_ngrams(cand_tokens[i], static_cast<size_t>(n));
            NgramCounts ref = count_ngrams(ref_tokens[i], static_cast<size_t>(n));
            for (const auto& [gram, count] : cand) {
                total += static_cast<double>(count);
                auto it = ref.find(gram);
                if (it != ref.end()) matched += static_cast<double>(std::min(count, it->second));
            }
        }
        if (total == 0.0) return 0.0;  // no n-grams at this order anywhere
        const double precision = (matched > 0.0 ? matched : kBleuEpsilon) / total;
        log_sum += std::log(precision);
    }
    const double geo_mean = std::exp(log_sum / static_cast<double>(max_n));
    double bp = 1.0;
    if (cand_len == 0) return 0.0;
    if (cand_len < ref_len)
        bp = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
    return 100.0 * bp * geo_mean;
}

RougeReport rouge(const std::vector<std::string>& candidates, const std::vector<std::string>& references) {
    if (candidates.size() != references.size())
        throw DataError("rouge: candidate/reference count mismatch");
    RougeReport out;
    if (candidates.empty()) return out;
    for (size_t i = 0; i < candidates.size(); ++i) {
        Tokens cand = normalize_tokens(candidates[i]);
        Tokens ref = normalize_tokens(references[i]);

        NgramCounts cand2 = count_ngrams(cand, 2);
        NgramCounts ref2 = count_ngrams(ref, 2);
        double matched = 0.0, cand_total = 0.0, ref_total = 0.0;
        for (const auto& [gram, count] : cand2) cand_total += static_cast<double>(count);
        for (const auto& [gram, count] : ref2) ref_total += static_cast<double>(count);
        for (const auto& [gram, count] : cand2) {
            auto it = ref2.find(gram);
            if (it != ref2.end()) matched += static_cast<double>(std::min(count, it->second));
        }
        RougeScore r2 = prf(matched, ref_total, cand_total);

        const double lcs = static_cast<double>(lcs_length(cand, ref));
        RougeScore rl = prf(lcs, static_cast<double>(ref.size()), static_cast<double>(cand.size()));

        out.rouge2.f += r2.f;
        out.rouge2.r += r2.r;
        out.rouge2.p += r2.p;
        out.rougeL.f += rl.f;
        out.rougeL.r += rl.r;
        out.rougeL.p += rl.p;
    }
    const double n = static_cast<double>(candidates.size());
    out.rouge2.f /= n;
    out.rouge2.r /= n;
    out.rouge2.p /= n;
    out.rougeL.f /= n;
    out.rougeL.r /= n;
    out.rougeL.p /= n;
    return out;
}

double usr(const std::vector<std::string>& candidates) {
    if (candidates.empty()) throw DataError("usr: needs at least one candidate");
    std::set<std::string> distinct;
    for (const std::string& c : candidates) distinct.insert(text::join(normalize_tokens(c)));
    return static_cast<double>(distinct.size()) / static_cast<double>(candidates.size());
}

double entity_coverage(const std::vector<std::string>& entity_names, const std::string& explanation,
                       CoverageMode mode) {
    std::set<Tokens> entities;
    for (const std::string& name : entity_names) {
        Tokens toks = normalize_tokens(name);
        if (!toks.empty()) entities.insert(std::move(toks));
    }
    if (entities.empty()) return 0.0;
    const Tokens expl = normalize_tokens(explanation);
    if (mode == CoverageMode::ContiguousSurface) {
        size_t found = 0;
        for (const Tokens& e : entities)
            if (contains_contiguous(expl, e)) ++found;
        return static_cast<double>(found) / static_cast<double>(entities.size());
    }
    std::set<std::string> expl_set(expl.begin(), expl.end());
    double sum = 0.0;
    for (const Tokens& e : entities) {
        size_t hit = 0;
        for (const std::string& t : e) hit += expl_set.count(t);
        sum += static_cast<double>(hit) / static_cast<double>(e.size());
    }
    return sum / static_cast<double>(entities.size());
}

double entity_coverage(const ItemKG& kg, const std::string& explanation, CoverageMode mode) {
    std::vector<std::string> names;
    names.push_back(text::join(kg.center.name));
    for (const Triple& t : kg.triples) names.push_back(text::join(t.tail));
    return entity_coverage(names, explanation, mode);
}

std::pair<double, double> rmse_mae(const std::vector<double>& predictions,
                                   const std::vector<double>& truths) {
    if (predictions.size() != truths.size()) throw DataError("rmse_mae: length mismatch");
    if (predictions.empty()) throw DataError("rmse_mae: empty input");
    double sq = 0.0, abs = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        const double e = predictions[i] - truths[i];
        sq += e * e;
        abs += std::abs(e);
    }
    const double n = static_cast<double>(predictions.size());
    return {std::sqrt(sq / n), abs / n};
}

std::string MetricsReport::to_tsv() const {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f",
                  bleu1, bleu4, usr, rouge2_f, rouge2_r, rouge2_p, rougeL_f, rougeL_r, rougeL_p, ec,
                  rmse, mae);
    return buf;
}

std::string MetricsReport::to_table() const {
    std::ostringstream out;
    char buf[128];
    auto row = [&](const char* name, double v) {
        std::snprintf(buf, sizeof(buf), "  %-10s %10.4f\n", name, v);
        out << buf;
    };
    out << "metric        value\n";
    row("BLEU-1", bleu1);
    row("BLEU-4", bleu4);
    row("USR", usr);
    row("R2-F", rouge2_f);
    row("R2-R", rouge2_r);
    row("R2-P", rouge2_p);
    row("RL-F", rougeL_f);
    row("RL-R", rougeL_r);
    row("RL-P", rougeL_p);
    row("EC", ec);
    row("RMSE", rmse);
    row("MAE", mae);
    return out.str();
}

}  // namespace kgxrec::metrics
