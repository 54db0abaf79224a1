#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgxrec {

// Default tokenizer: lowercased whitespace split with boundary punctuation
// stripped. Swap in a different `tokenize` (e.g. subword) by passing another
// tokenizer wherever this one is accepted.
class Tokenizer {
public:
    std::vector<std::string> tokenize(std::string_view s) const;
};

// Fixed vocabulary with reserved control tokens and the five sequence markers.
// Ids: 0 <pad>, 1 <bos>, 2 <eos>, 3 <unk>, 4..8 markers, then corpus tokens
// ordered by (count desc, token asc).
class Vocabulary {
public:
    static constexpr int32_t kPad = 0;
    static constexpr int32_t kBos = 1;
    static constexpr int32_t kEos = 2;
    static constexpr int32_t kUnk = 3;
    static constexpr int32_t kUserMarker = 4;
    static constexpr int32_t kGraphMarker = 5;
    static constexpr int32_t kHeadMarker = 6;
    static constexpr int32_t kRelationMarker = 7;
    static constexpr int32_t kTailMarker = 8;
    static constexpr int32_t kFirstWord = 9;

    Vocabulary();

    static Vocabulary build(const std::vector<std::vector<std::string>>& token_streams, size_t cap = 0);

    int32_t id(const std::string& token) const;  // kUnk when unknown
    const std::string& token(int32_t id) const;
    size_t size() const { return tokens_.size(); }
    bool is_marker(int32_t id) const { return id >= kUserMarker && id <= kTailMarker; }
    bool is_control(int32_t id) const { return id >= 0 && id < kFirstWord; }

    std::vector<int32_t> ids(const std::vector<std::string>& tokens) const;
    std::string decode(const std::vector<int32_t>& ids) const;  // words only, space joined

    uint64_t hash() const;

    void save(const std::filesystem::path& path) const;
    static Vocabulary load(const std::filesystem::path& path);

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int32_t> index_;
    void reindex();
};

}  // namespace kgxrec
