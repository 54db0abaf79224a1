#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace kgxrec {

// Size caps applied at construction and linearization time.
struct Limits {
    size_t max_user_size = 64;      // purchase count cap and user-section token budget
    size_t max_kg_size = 192;       // item-KG token budget (center + relation/tail names)
    size_t max_component_len = 60;  // relation/tail name length cap, in tokens
};

struct Item {
    std::string id;
    std::vector<std::string> name;  // >= 1 token
};

// A user is their ordered purchase history, most recent last.
struct UserHistory {
    std::string user_id;
    std::vector<Item> purchases;
};

// (center, relation, tail); the head is always the owning KG's center item.
struct Triple {
    std::vector<std::string> relation;
    std::vector<std::string> tail;
};

struct ItemKG {
    Item center;
    std::vector<Triple> triples;
    size_t token_count() const;  // center + relation/tail name tokens
};

struct Interaction {
    std::string user_id;
    std::string item_id;
    double rating = 0.0;  // in [1, 5]
    std::string explanation;
};

Item make_item(std::string id, std::vector<std::string> name_tokens);

// Truncates to the most recent `max_user_size` purchases.
UserHistory make_user_history(std::string user_id, std::vector<Item> purchases, const Limits& limits = {});

// Validates relation/tail lengths and drops trailing triples until the
// linearized token count fits `max_kg_size`. The center is never dropped.
ItemKG make_item_kg(Item center, std::vector<Triple> triples, const Limits& limits = {});

Interaction make_interaction(std::string user_id, std::string item_id, double rating,
                             std::string explanation, bool require_explanation = true);

enum class ComponentKind : uint8_t { Purchase, Center, Relation, Tail };

struct Component {
    ComponentKind kind;
    std::vector<std::string> tokens;
};

// Purchases linked to the center item and mutually interconnected, the center
// linked to each relation, each relation linked to its tail. Purchase-center
// edges are structural only; they never carry tokens.
class UserItemGraph {
public:
    static UserItemGraph build(const UserHistory& user, const ItemKG& kg);

    const std::vector<Component>& components() const { return components_; }
    size_t num_components() const { return components_.size(); }
    size_t num_purchases() const { return num_purchases_; }
    size_t num_triples() const { return num_triples_; }

    bool adjacent(size_t i, size_t j) const;
    const std::vector<uint8_t>& adjacency() const { return adjacency_; }

private:
    std::vector<Component> components_;
    std::vector<uint8_t> adjacency_;  // m*m, row-major, no self loops
    size_t num_purchases_ = 0;
    size_t num_triples_ = 0;
};

// The shared adjacency rule over the component ordering
// [purchases..., center, (relation, tail) per triple].
std::vector<uint8_t> component_adjacency(size_t num_purchases, size_t num_triples);

}  // namespace kgxrec
