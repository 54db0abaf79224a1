#include "kgxrec/graph.hpp"

#include "kgxrec/error.hpp"

namespace kgxrec {

size_t ItemKG::token_count() const {
    size_t n = center.name.size();
    for (const Triple& t : triples) n += t.relation.size() + t.tail.size();
    return n;
}

Item make_item(std::string id, std::vector<std::string> name_tokens) {
    if (name_tokens.empty()) throw DataError("item '" + id + "' has an empty name");
    return Item{std::move(id), std::move(name_tokens)};
}

UserHistory make_user_history(std::string user_id, std::vector<Item> purchases, const Limits& limits) {
    if (purchases.empty()) throw DataError("user '" + user_id + "' has no purchase history");
    for (const Item& it : purchases) {
        if (it.name.empty()) throw DataError("purchase '" + it.id + "' has an empty name");
    }
    if (purchases.size() > limits.max_user_size) {
        purchases.erase(purchases.begin(),
                        purchases.begin() + static_cast<long>(purchases.size() - limits.max_user_size));
    }
    return UserHistory{std::move(user_id), std::move(purchases)};
}

ItemKG make_item_kg(Item center, std::vector<Triple> triples, const Limits& limits) {
    if (center.name.empty()) throw DataError("item KG center '" + center.id + "' has an empty name");
    if (triples.empty()) throw DataError("item KG for '" + center.id + "' has no triples");
    for (const Triple& t : triples) {
        if (t.relation.empty() || t.tail.empty())
            throw DataError("item KG for '" + center.id + "' has a triple with an empty relation or tail");
        if (t.relation.size() > limits.max_component_len || t.tail.size() > limits.max_component_len)
            throw DataError("item KG for '" + center.id + "' has a relation or tail longer than " +
                            std::to_string(limits.max_component_len) + " tokens");
    }
    if (center.name.size() > limits.max_kg_size)
        throw DataError("item KG center '" + center.id + "' alone exceeds the KG token budget");
    ItemKG kg{std::move(center), std::move(triples)};
    while (kg.token_count() > limits.max_kg_size && kg.triples.size() > 1) kg.triples.pop_back();
    if (kg.token_count() > limits.max_kg_size)
        throw DataError("item KG for '" + kg.center.id + "' does not fit the KG token budget");
    return kg;
}

Interaction make_interaction(std::string user_id, std::string item_id, double rating,
                             std::string explanation, bool require_explanation) {
    if (rating < 1.0 || rating > 5.0)
        throw DataError("rating " + std::to_string(rating) + " outside [1, 5] for user '" + user_id + "'");
    if (require_explanation && explanation.empty())
        throw DataError("empty explanation in training record for user '" + user_id + "'");
    return Interaction{std::move(user_id), std::move(item_id), rating, std::move(explanation)};
}

std::vector<uint8_t> component_adjacency(size_t num_purchases, size_t num_triples) {
    const size_t m = num_purchases + 1 + 2 * num_triples;
    const size_t center = num_purchases;
    std::vector<uint8_t> adj(m * m, 0);
    auto connect = [&](size_t i, size_t j) {
        adj[i * m + j] = 1;
        adj[j * m + i] = 1;
    };
    // Purchases are mutually connected and connected to the center.
    for (size_t i = 0; i < num_purchases; ++i) {
        for (size_t j = i + 1; j < num_purchases; ++j) connect(i, j);
        connect(i, center);
    }
    // Each relation connects the center to its tail.
    for (size_t t = 0; t < num_triples; ++t) {
        size_t rel = center + 1 + 2 * t;
        size_t tail = rel + 1;
        connect(center, rel);
        connect(rel, tail);
    }
    return adj;
}

UserItemGraph UserItemGraph::build(const UserHistory& user, const ItemKG& kg) {
    if (user.purchases.empty())
        throw DataError("cannot build a user-item graph for a user without purchases");
    if (kg.triples.empty())
        throw DataError("cannot build a user-item graph from an item KG without triples");

    UserItemGraph g;
    g.num_purchases_ = user.purchases.size();
    g.num_triples_ = kg.triples.size();
    g.components_.reserve(g.num_purchases_ + 1 + 2 * g.num_triples_);
    for (const Item& p : user.purchases) g.components_.push_back({ComponentKind::Purchase, p.name});
    g.components_.push_back({ComponentKind::Center, kg.center.name});
    for (const Triple& t : kg.triples) {
        g.components_.push_back({ComponentKind::Relation, t.relation});
        g.components_.push_back({ComponentKind::Tail, t.tail});
    }
    g.adjacency_ = component_adjacency(g.num_purchases_, g.num_triples_);
    return g;
}

bool UserItemGraph::adjacent(size_t i, size_t j) const {
    return adjacency_[i * num_components() + j] != 0;
}

}  // namespace kgxrec
