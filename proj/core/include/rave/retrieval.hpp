#pragma once
// Per-claim snippet context pool: one search query per extracted entity,
// merged in entity order and deduplicated by canonical url. Snippets only;
// nothing here ever fetches page bodies.

#include <string>
#include <vector>

#include "rave/gateway.hpp"
#include "rave/model.hpp"

namespace rave {

struct PerEntityCount {
    Entity entity;
    int count = 0;      // snippets this entity contributed before dedup
    bool failed = false;  // the search call for this entity failed

    bool operator==(const PerEntityCount&) const = default;
};

struct ContextPool {
    std::string claim_id;
    std::vector<Snippet> snippets;  // entity order, then engine rank; url-deduplicated
    std::vector<PerEntityCount> per_entity_counts;  // one row per input entity, in order

    bool operator==(const ContextPool&) const = default;
};

// Canonical url key: lowercased host, scheme stripped, trailing slash
// stripped, fragment stripped, query retained. Unparseable urls fall back
// to the verbatim string.
std::string dedup_key(const Snippet& snippet);

// Queries the bare entity surface once per entity. First-seen wins on url
// collisions (entity order, then rank). A failing query contributes zero
// snippets and sets the failure flag; the pool is still returned.
ContextPool build_pool(Gateway& gateway, const Claim& claim, const std::vector<Entity>& entities);

// Audit dump format for the `retrieve` subcommand: one pool per line.
std::string serialize_pool(const ContextPool& pool);
ContextPool parse_pool(const std::string& line);

}  // namespace rave
