#include "kgxrec/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "kgxrec/error.hpp"
#include "kgxrec/text.hpp"

namespace kgxrec {

namespace {
const char* kReserved[] = {"<pad>", "<bos>", "<eos>", "<unk>",
                           "[user]", "[graph]", "[head]", "[relation]", "[tail]"};
}

std::vector<std::string> Tokenizer::tokenize(std::string_view s) const {
    return text::word_tokens(s);
}

Vocabulary::Vocabulary() {
    for (const char* t : kReserved) tokens_.emplace_back(t);
    reindex();
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& token_streams, size_t cap) {
    std::map<std::string, size_t> counts;
    for (const auto& stream : token_streams)
        for (const auto& tok : stream)
            if (!tok.empty()) ++counts[tok];
    for (const char* t : kReserved) counts.erase(t);

    std::vector<std::pair<std::string, size_t>> by_count(counts.begin(), counts.end());
    std::sort(by_count.begin(), by_count.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary v;
    for (const auto& [tok, cnt] : by_count) {
        if (cap > 0 && v.tokens_.size() >= cap) break;
        v.tokens_.push_back(tok);
    }
    v.reindex();
    return v;
}

void Vocabulary::reindex() {
    index_.clear();
    index_.reserve(tokens_.size());
    for (size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = static_cast<int32_t>(i);
}

int32_t Vocabulary::id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int32_t id) const {
    if (id < 0 || static_cast<size_t>(id) >= tokens_.size())
        throw DataError("token id " + std::to_string(id) + " outside vocabulary");
    return tokens_[static_cast<size_t>(id)];
}

std::vector<int32_t> Vocabulary::ids(const std::vector<std::string>& tokens) const {
    std::vector<int32_t> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(id(t));
    return out;
}

std::string Vocabulary::decode(const std::vector<int32_t>& ids) const {
    std::string out;
    for (int32_t id : ids) {
        if (is_control(id)) continue;
        if (!out.empty()) out.push_back(' ');
        out += token(id);
    }
    return out;
}

uint64_t Vocabulary::hash() const {
    uint64_t h = 1469598103934665603ull;
    for (const auto& t : tokens_) {
        h = text::fnv1a(t, h);
        h = text::fnv1a("\n", h);
    }
    return h;
}

void Vocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write vocabulary to " + path.string());
    for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read vocabulary from " + path.string());
    Vocabulary v;
    v.tokens_.clear();
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) v.tokens_.push_back(line);
    }
    if (v.tokens_.size() < static_cast<size_t>(kFirstWord))
        throw DataError("vocabulary file " + path.string() + " is missing reserved tokens");
    for (int32_t i = 0; i < kFirstWord; ++i) {
        if (v.tokens_[static_cast<size_t>(i)] != kReserved[i])
            throw DataError("vocabulary file " + path.string() + " has unexpected reserved tokens");
    }
    v.reindex();
    return v;
}

}  // namespace kgxrec
