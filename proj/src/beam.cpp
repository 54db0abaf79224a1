#include "kgxrec/beam.hpp"

#include <algorithm>

#include "kgxrec/error.hpp"

namespace kgxrec {

namespace {

struct Hypothesis {
    std::vector<int32_t> tokens;  // includes eos once finished
    double sum_logp = 0.0;
    bool finished = false;

    double normalized() const {
        return tokens.empty() ? 0.0 : sum_logp / static_cast<double>(tokens.size());
    }
};

}  // namespace

std::vector<int32_t> beam_search(const StepFn& step, size_t vocab_size, size_t beam_size,
                                 size_t max_len, int32_t eos_id) {
    if (beam_size == 0) throw ConfigError("beam_search: beam size must be >= 1");
    if (max_len == 0) return {};

    std::vector<Hypothesis> beams{Hypothesis{}};
    for (size_t t = 0; t < max_len; ++t) {
        bool any_open = false;
        for (const Hypothesis& h : beams) any_open = any_open || !h.finished;
        if (!any_open) break;

        // (normalized score, token, parent) per candidate; finished beams pass
        // through with a sentinel token so they sort deterministically.
        struct Candidate {
            double norm;
            double sum_logp;
            int32_t token;
            size_t parent;
            bool from_finished;
        };
        std::vector<Candidate> candidates;
        for (size_t b = 0; b < beams.size(); ++b) {
            const Hypothesis& h = beams[b];
            if (h.finished) {
                candidates.push_back({h.normalized(), h.sum_logp, -1, b, true});
                continue;
            }
            std::vector<double> logp = step(h.tokens);
            if (logp.size() != vocab_size) throw NumericError("beam_search: step returned wrong width");
            const double len = static_cast<double>(h.tokens.size() + 1);
            for (size_t v = 0; v < vocab_size; ++v) {
                const double s = h.sum_logp + logp[v];
                candidates.push_back({s / len, s, static_cast<int32_t>(v), b, false});
            }
        }
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.norm != b.norm) return a.norm > b.norm;
            if (a.token != b.token) return a.token < b.token;
            return a.parent < b.parent;
        });

        std::vector<Hypothesis> next;
        next.reserve(beam_size);
        for (const Candidate& c : candidates) {
            if (next.size() >= beam_size) break;
            if (c.from_finished) {
                next.push_back(beams[c.parent]);
                continue;
            }
            Hypothesis h = beams[c.parent];
            h.tokens.push_back(c.token);
            h.sum_logp = c.sum_logp;
            h.finished = (c.token == eos_id);
            next.push_back(std::move(h));
        }
        beams = std::move(next);
    }

    // Best by normalized score; prefer finished hypotheses on exact ties.
    size_t best = 0;
    for (size_t b = 1; b < beams.size(); ++b) {
        const double sb = beams[b].normalized(), sbest = beams[best].normalized();
        if (sb > sbest || (sb == sbest && beams[b].finished && !beams[best].finished)) best = b;
    }
    std::vector<int32_t> out = beams[best].tokens;
    if (!out.empty() && out.back() == eos_id) out.pop_back();
    return out;
}

}  // namespace kgxrec
