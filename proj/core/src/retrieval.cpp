#include "rave/retrieval.hpp"

#include <unordered_set>

#include "json_util.hpp"
#include "rave/log.hpp"
#include "rave/text.hpp"

namespace rave {

using jsonu::json;

std::string dedup_key(const Snippet& snippet) { return canonical_url_key(snippet.url); }

ContextPool build_pool(Gateway& gateway, const Claim& claim,
                       const std::vector<Entity>& entities) {
    ContextPool pool;
    pool.claim_id = claim.id;

    std::unordered_set<std::string> seen_urls;
    int failures = 0;
    for (const Entity& entity : entities) {
        PerEntityCount row;
        row.entity = entity;
        std::vector<SearchResult> results;
        try {
            results = gateway.search(entity.surface);
        } catch (const Error& e) {
            row.failed = true;
            ++failures;
            log::warn("search failed for entity '" + entity.surface + "': " + e.what());
            pool.per_entity_counts.push_back(std::move(row));
            continue;
        }
        row.count = static_cast<int>(results.size());
        for (const SearchResult& r : results) {
            Snippet snippet;
            snippet.text = r.text;
            snippet.domain = r.domain;
            snippet.title = r.title;
            snippet.url = r.url;
            snippet.origin_entity = entity;
            snippet.rank_in_search = r.rank_in_search;
            if (seen_urls.insert(dedup_key(snippet)).second) {
                pool.snippets.push_back(std::move(snippet));
            }
        }
        pool.per_entity_counts.push_back(std::move(row));
    }

    if (!entities.empty() && failures == static_cast<int>(entities.size())) {
        log::warn("all " + std::to_string(failures) + " entity queries failed for claim " +
                  claim.id + "; continuing with an empty pool");
    }
    return pool;
}

std::string serialize_pool(const ContextPool& pool) {
    json snippets = json::array();
    for (const Snippet& s : pool.snippets) {
        snippets.push_back(json::parse(serialize_record(Record{s})));
    }
    json per_entity = json::array();
    for (const PerEntityCount& row : pool.per_entity_counts) {
        per_entity.push_back(json{{"surface", row.entity.surface},
                                  {"kind", to_string(row.entity.kind)},
                                  {"count", row.count},
                                  {"failed", row.failed}});
    }
    json j{{"v", kRecordSchemaVersion},
           {"t", "pool"},
           {"claim_id", pool.claim_id},
           {"snippets", snippets},
           {"per_entity_counts", per_entity}};
    return j.dump();
}

ContextPool parse_pool(const std::string& line) {
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
        throw RecordParseError("pool line is not a JSON object");
    }
    if (jsonu::require_integer(j, "v") != kRecordSchemaVersion) {
        throw RecordParseError("unsupported schema version", "v");
    }
    if (jsonu::require_string(j, "t") != "pool") {
        throw RecordParseError("record is not a pool", "t");
    }
    ContextPool pool;
    pool.claim_id = jsonu::require_string(j, "claim_id");
    for (const json& s : jsonu::require_array(j, "snippets")) {
        json with_tag = s;
        pool.snippets.push_back(parse_record_as<Snippet>(with_tag.dump()));
    }
    for (const json& row : jsonu::require_array(j, "per_entity_counts")) {
        PerEntityCount c;
        c.entity.surface = jsonu::require_string(row, "surface");
        std::string kind = jsonu::require_string(row, "kind");
        auto parsed = entity_kind_from_string(kind);
        if (!parsed) throw RecordParseError("unknown entity kind '" + kind + "'", "kind");
        c.entity.kind = *parsed;
        c.count = static_cast<int>(jsonu::require_integer(row, "count"));
        if (!row.contains("failed") || !row["failed"].is_boolean()) {
            throw RecordParseError("missing or non-boolean field 'failed'", "failed");
        }
        c.failed = row["failed"].get<bool>();
        pool.per_entity_counts.push_back(std::move(c));
    }
    return pool;
}

}  // namespace rave
