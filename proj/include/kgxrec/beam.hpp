#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace kgxrec {

// Log-probabilities over the vocabulary for the next token, given the emitted
// prefix (without <bos>).
using StepFn = std::function<std::vector<double>(const std::vector<int32_t>&)>;

// Length-normalized beam search: hypotheses are ranked by sum(log p) / length,
// where length counts emitted tokens including <eos>. A beam of 1 is greedy
// decoding. Ties break deterministically on (token id, parent beam index).
// The returned sequence excludes <eos>.
std::vector<int32_t> beam_search(const StepFn& step, size_t vocab_size, size_t beam_size,
                                 size_t max_len, int32_t eos_id);

}  // namespace kgxrec
