#include "kgxrec/text.hpp"

#include <cctype>

namespace kgxrec::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        if (j > i) {
            size_t a = i, b = j;
            while (a < b && is_punct(s[a])) ++a;
            while (b > a && is_punct(s[b - 1])) --b;
            if (b > a) out.push_back(to_lower(s.substr(a, b - a)));
        }
        i = j;
    }
    return out;
}

std::string join(const std::vector<std::string>& tokens, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out.append(sep);
        out.append(tokens[i]);
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        bool terminal = (c == '.' || c == '!' || c == '?');
        bool at_break = terminal && (i + 1 == s.size() || is_space(s[i + 1]));
        if (at_break) {
            std::string sent = trim(s.substr(start, i - start + 1));
            if (!sent.empty()) out.push_back(std::move(sent));
            start = i + 1;
        }
    }
    if (start < s.size()) {
        std::string sent = trim(s.substr(start));
        if (!sent.empty()) out.push_back(std::move(sent));
    }
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::string trim(std::string_view s) {
    size_t a = 0, b = s.size();
    while (a < b && is_space(s[a])) ++a;
    while (b > a && is_space(s[b - 1])) --b;
    return std::string(s.substr(a, b - a));
}

uint64_t fnv1a(std::string_view s, uint64_t seed) {
    uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace kgxrec::text
