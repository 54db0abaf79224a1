#pragma once

#include <cstddef>

namespace kgxrec {

// Half-open token range [begin, end).
struct Span {
    size_t begin = 0;
    size_t end = 0;
    size_t length() const { return end - begin; }
};

}  // namespace kgxrec
