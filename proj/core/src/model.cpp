#include "rave/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "rave/log.hpp"
#include "rave/text.hpp"

namespace rave {

using jsonu::json;

// ---------------------------------------------------------------------------
// Enums

std::string to_string(VerifiabilityLabel label) {
    return label == VerifiabilityLabel::Verifiable ? "VERIFIABLE" : "NON-VERIFIABLE";
}

std::optional<VerifiabilityLabel> label_from_string(std::string_view s) {
    if (s == "VERIFIABLE") return VerifiabilityLabel::Verifiable;
    if (s == "NON-VERIFIABLE") return VerifiabilityLabel::NonVerifiable;
    return std::nullopt;
}

std::string to_string(EntityKind kind) {
    switch (kind) {
        case EntityKind::Person: return "PERSON";
        case EntityKind::Org: return "ORG";
        case EntityKind::Location: return "LOCATION";
        case EntityKind::Event: return "EVENT";
        case EntityKind::ClaimObject: return "CLAIM_OBJECT";
    }
    return "CLAIM_OBJECT";
}

std::optional<EntityKind> entity_kind_from_string(std::string_view s) {
    for (EntityKind kind : kAllEntityKinds) {
        if (to_string(kind) == s) return kind;
    }
    return std::nullopt;
}

std::string to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::TextOnly: return "TEXT_ONLY";
        case Strategy::RandK: return "RAND_K";
        case Strategy::SearchK: return "SEARCH_K";
        case Strategy::RaveStats: return "RAVE_STATS";
        case Strategy::RaveMeta: return "RAVE_META";
        case Strategy::Rave: return "RAVE";
    }
    return "RAVE";
}

std::optional<Strategy> strategy_from_string(std::string_view s) {
    for (Strategy strategy : kAllStrategies) {
        if (to_string(strategy) == s) return strategy;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Credibility value set

const std::array<double, 7>& allowed_credibility_values() {
    static const std::array<double, 7> values = {1.00, 0.95, 0.85, 0.75, 0.65, 0.50, 0.40};
    return values;
}

bool is_allowed_credibility(double c) {
    for (double v : allowed_credibility_values()) {
        if (c == v) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Validation

void validate(const Claim& claim) {
    if (claim.id.empty()) throw ValidationError("claim id must be non-empty", "id");
    if (trim(claim.text).empty()) {
        throw ValidationError("claim text must be non-empty after trimming", "text");
    }
}

void validate(const Entity& entity) {
    if (trim(entity.surface).empty()) {
        throw ValidationError("entity surface must be non-empty", "surface");
    }
}

void validate(const Snippet& snippet) {
    validate(snippet.origin_entity);
    if (snippet.url.empty()) throw ValidationError("snippet url must be non-empty", "url");
    if (snippet.domain.empty()) {
        throw ValidationError("snippet domain must be non-empty", "domain");
    }
    if (snippet.domain != to_lower_ascii(snippet.domain)) {
        throw ValidationError("snippet domain must be lowercase", "domain");
    }
    std::string derived = domain_of_url(snippet.url);
    if (!derived.empty() && derived != snippet.domain) {
        throw ValidationError("snippet domain '" + snippet.domain +
                                  "' does not match url host '" + derived + "'",
                              "domain");
    }
    if (snippet.rank_in_search < 1) {
        throw ValidationError("rank_in_search must be >= 1", "rank_in_search");
    }
}

void validate(const ScoredSnippet& scored) {
    validate(scored.snippet);
    if (!(scored.relevance >= -1.0 && scored.relevance <= 1.0)) {
        throw ValidationError("relevance must be in [-1, 1]", "relevance");
    }
    if (!is_allowed_credibility(scored.credibility)) {
        std::ostringstream msg;
        msg << "credibility " << scored.credibility << " is not one of the allowed values";
        throw ValidationError(msg.str(), "credibility");
    }
}

void validate(const Decision& decision) {
    if (decision.claim_id.empty()) {
        throw ValidationError("decision claim_id must be non-empty", "claim_id");
    }
    if (decision.strategy == Strategy::TextOnly && !decision.evidence_used.empty()) {
        throw ValidationError("TEXT_ONLY decisions must carry no evidence", "evidence_used");
    }
    for (const ScoredSnippet& s : decision.evidence_used) validate(s);
}

void validate(const RetrievalStats& stats) {
    if (stats.entity_count < 0) throw ValidationError("entity_count must be >= 0", "entity_count");
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(stats.entity_coverage)) {
        throw ValidationError("entity_coverage must be in [0, 1]", "entity_coverage");
    }
    if (stats.entity_count == 0 && stats.entity_coverage != 0.0) {
        throw ValidationError("entity_coverage must be 0 when entity_count is 0",
                              "entity_coverage");
    }
    if (!in_unit(stats.snippet_coverage)) {
        throw ValidationError("snippet_coverage must be in [0, 1]", "snippet_coverage");
    }
    if (!in_unit(stats.source_diversity)) {
        throw ValidationError("source_diversity must be in [0, 1]", "source_diversity");
    }
    if (!(stats.inter_snippet_agreement >= -1.0 && stats.inter_snippet_agreement <= 1.0)) {
        throw ValidationError("inter_snippet_agreement must be in [-1, 1]",
                              "inter_snippet_agreement");
    }
}

void validate(const ExtractionResult& result) {
    if (result.claim_id.empty()) {
        throw ValidationError("extraction claim_id must be non-empty", "claim_id");
    }
    for (const Entity& e : result.entities) validate(e);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json entity_to_json(const Entity& entity) {
    return json{{"surface", entity.surface}, {"kind", to_string(entity.kind)}};
}

Entity entity_from_json(const json& j) {
    Entity entity;
    entity.surface = jsonu::require_string(j, "surface");
    std::string kind = jsonu::require_string(j, "kind");
    auto parsed = entity_kind_from_string(kind);
    if (!parsed) throw RecordParseError("unknown entity kind '" + kind + "'", "kind");
    entity.kind = *parsed;
    return entity;
}

json snippet_to_json(const Snippet& snippet) {
    return json{{"text", snippet.text},
                {"domain", snippet.domain},
                {"title", snippet.title},
                {"url", snippet.url},
                {"origin", entity_to_json(snippet.origin_entity)},
                {"rank", snippet.rank_in_search}};
}

Snippet snippet_from_json(const json& j) {
    Snippet snippet;
    snippet.text = jsonu::require_string(j, "text");
    snippet.domain = jsonu::require_string(j, "domain");
    snippet.title = jsonu::require_string(j, "title");
    snippet.url = jsonu::require_string(j, "url");
    snippet.origin_entity = entity_from_json(jsonu::require_object(j, "origin"));
    snippet.rank_in_search = static_cast<int>(jsonu::require_integer(j, "rank"));
    return snippet;
}

json scored_to_json(const ScoredSnippet& scored) {
    return json{{"snippet", snippet_to_json(scored.snippet)},
                {"relevance", scored.relevance},
                {"credibility", scored.credibility},
                {"combined", scored.combined}};
}

ScoredSnippet scored_from_json(const json& j) {
    ScoredSnippet scored;
    scored.snippet = snippet_from_json(jsonu::require_object(j, "snippet"));
    scored.relevance = jsonu::require_number(j, "relevance");
    scored.credibility = jsonu::require_number(j, "credibility");
    scored.combined = jsonu::require_number(j, "combined");
    return scored;
}

VerifiabilityLabel label_from_field(const json& j, const char* field) {
    std::string s = jsonu::require_string(j, field);
    auto parsed = label_from_string(s);
    if (!parsed) throw RecordParseError("unknown label '" + s + "'", field);
    return *parsed;
}

struct RecordWriter {
    json operator()(const Claim& claim) const {
        json j{{"t", "claim"}, {"id", claim.id}, {"text", claim.text}};
        if (claim.gold_label) j["gold"] = to_string(*claim.gold_label);
        if (claim.source_dataset) j["source"] = *claim.source_dataset;
        return j;
    }
    json operator()(const Entity& entity) const {
        json j = entity_to_json(entity);
        j["t"] = "entity";
        return j;
    }
    json operator()(const Snippet& snippet) const {
        json j = snippet_to_json(snippet);
        j["t"] = "snippet";
        return j;
    }
    json operator()(const ScoredSnippet& scored) const {
        json j = scored_to_json(scored);
        j["t"] = "scored_snippet";
        return j;
    }
    json operator()(const Decision& decision) const {
        json evidence = json::array();
        for (const ScoredSnippet& s : decision.evidence_used) evidence.push_back(scored_to_json(s));
        return json{{"t", "decision"},
                    {"claim_id", decision.claim_id},
                    {"strategy", to_string(decision.strategy)},
                    {"label", to_string(decision.label)},
                    {"raw", decision.raw_model_output},
                    {"evidence", evidence},
                    {"prompt_hash", decision.prompt_hash}};
    }
    json operator()(const RetrievalStats& stats) const {
        return json{{"t", "retrieval_stats"},
                    {"entity_count", stats.entity_count},
                    {"entity_coverage", stats.entity_coverage},
                    {"snippet_coverage", stats.snippet_coverage},
                    {"source_diversity", stats.source_diversity},
                    {"inter_snippet_agreement", stats.inter_snippet_agreement}};
    }
    json operator()(const ExtractionResult& result) const {
        json entities = json::array();
        for (const Entity& e : result.entities) entities.push_back(entity_to_json(e));
        return json{{"t", "extraction_result"},
                    {"claim_id", result.claim_id},
                    {"entities", entities},
                    {"raw", result.raw_model_output},
                    {"prompt_digest", result.prompt_digest}};
    }
};

}  // namespace

std::string serialize_record(const Record& record) {
    json j = std::visit(RecordWriter{}, record);
    j["v"] = kRecordSchemaVersion;
    return j.dump();
}

Record parse_record(const std::string& line) {
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
        throw RecordParseError("line is not a JSON object");
    }
    long long version = jsonu::require_integer(j, "v");
    if (version != kRecordSchemaVersion) {
        throw RecordParseError("unsupported schema version " + std::to_string(version), "v");
    }
    std::string tag = jsonu::require_string(j, "t");

    if (tag == "claim") {
        Claim claim;
        claim.id = jsonu::require_string(j, "id");
        claim.text = jsonu::require_string(j, "text");
        if (j.contains("gold")) claim.gold_label = label_from_field(j, "gold");
        claim.source_dataset = jsonu::optional_string(j, "source");
        validate(claim);
        return claim;
    }
    if (tag == "entity") {
        Entity entity = entity_from_json(j);
        validate(entity);
        return entity;
    }
    if (tag == "snippet") {
        Snippet snippet = snippet_from_json(j);
        validate(snippet);
        return snippet;
    }
    if (tag == "scored_snippet") {
        ScoredSnippet scored = scored_from_json(j);
        validate(scored);
        return scored;
    }
    if (tag == "decision") {
        Decision decision;
        decision.claim_id = jsonu::require_string(j, "claim_id");
        std::string strategy = jsonu::require_string(j, "strategy");
        auto parsed = strategy_from_string(strategy);
        if (!parsed) throw RecordParseError("unknown strategy '" + strategy + "'", "strategy");
        decision.strategy = *parsed;
        decision.label = label_from_field(j, "label");
        decision.raw_model_output = jsonu::require_string(j, "raw");
        for (const json& e : jsonu::require_array(j, "evidence")) {
            if (!e.is_object()) throw RecordParseError("evidence items must be objects", "evidence");
            decision.evidence_used.push_back(scored_from_json(e));
        }
        decision.prompt_hash = jsonu::require_string(j, "prompt_hash");
        validate(decision);
        return decision;
    }
    if (tag == "retrieval_stats") {
        RetrievalStats stats;
        stats.entity_count = static_cast<int>(jsonu::require_integer(j, "entity_count"));
        stats.entity_coverage = jsonu::require_number(j, "entity_coverage");
        stats.snippet_coverage = jsonu::require_number(j, "snippet_coverage");
        stats.source_diversity = jsonu::require_number(j, "source_diversity");
        stats.inter_snippet_agreement = jsonu::require_number(j, "inter_snippet_agreement");
        validate(stats);
        return stats;
    }
    if (tag == "extraction_result") {
        ExtractionResult result;
        result.claim_id = jsonu::require_string(j, "claim_id");
        for (const json& e : jsonu::require_array(j, "entities")) {
            if (!e.is_object()) throw RecordParseError("entities items must be objects", "entities");
            result.entities.push_back(entity_from_json(e));
        }
        result.raw_model_output = jsonu::require_string(j, "raw");
        result.prompt_digest = jsonu::require_string(j, "prompt_digest");
        validate(result);
        return result;
    }
    throw RecordParseError("unknown record type tag '" + tag + "'", "t");
}

std::vector<Record> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open record file: " + path);
    std::vector<Record> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            records.push_back(parse_record(line));
        } catch (const Error& e) {
            throw RecordParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

void write_records(const std::string& path, const std::vector<Record>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot open record file for writing: " + path);
    for (const Record& r : records) out << serialize_record(r) << '\n';
}

}  // namespace rave
