#pragma once
// Shared domain types and the canonical line-record format.
//
// Records serialize to single-line JSON with a mandatory schema version
// field "v" and a type tag "t". All types are immutable value types once
// constructed and safe to share across workers.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rave/errors.hpp"

namespace rave {

inline constexpr int kRecordSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Enums

enum class VerifiabilityLabel { Verifiable, NonVerifiable };

// Serialized forms are exactly "VERIFIABLE" and "NON-VERIFIABLE".
std::string to_string(VerifiabilityLabel label);
std::optional<VerifiabilityLabel> label_from_string(std::string_view s);

enum class EntityKind { Person, Org, Location, Event, ClaimObject };

inline constexpr std::array<EntityKind, 5> kAllEntityKinds = {
    EntityKind::Person, EntityKind::Org, EntityKind::Location, EntityKind::Event,
    EntityKind::ClaimObject};

std::string to_string(EntityKind kind);
std::optional<EntityKind> entity_kind_from_string(std::string_view s);

enum class Strategy { TextOnly, RandK, SearchK, RaveStats, RaveMeta, Rave };

inline constexpr std::array<Strategy, 6> kAllStrategies = {
    Strategy::TextOnly, Strategy::RandK,    Strategy::SearchK,
    Strategy::RaveStats, Strategy::RaveMeta, Strategy::Rave};

std::string to_string(Strategy strategy);
std::optional<Strategy> strategy_from_string(std::string_view s);

// ---------------------------------------------------------------------------
// Domain types

struct Claim {
    std::string id;
    std::string text;
    std::optional<VerifiabilityLabel> gold_label;
    std::optional<std::string> source_dataset;

    bool operator==(const Claim&) const = default;
};

struct Entity {
    std::string surface;
    EntityKind kind = EntityKind::ClaimObject;

    bool operator==(const Entity&) const = default;
};

struct Snippet {
    std::string text;
    std::string domain;  // lowercase hostname parsed from url
    std::string title;
    std::string url;
    Entity origin_entity;   // the entity whose query produced this result
    int rank_in_search = 1; // 1-based position in the engine result list

    bool operator==(const Snippet&) const = default;
};

struct ScoredSnippet {
    Snippet snippet;
    double relevance = 0.0;    // cosine, in [-1, 1]
    double credibility = 0.4;  // one of the seven heuristic values
    double combined = 0.0;     // alpha*relevance + (1-alpha)*credibility

    bool operator==(const ScoredSnippet&) const = default;
};

struct Decision {
    std::string claim_id;
    Strategy strategy = Strategy::Rave;
    VerifiabilityLabel label = VerifiabilityLabel::NonVerifiable;
    std::string raw_model_output;
    std::vector<ScoredSnippet> evidence_used;  // empty for TEXT_ONLY / RAVE_STATS
    std::string prompt_hash;  // sha256 of the rendered decision prompt

    bool operator==(const Decision&) const = default;
};

struct RetrievalStats {
    int entity_count = 0;
    double entity_coverage = 0.0;         // entities with >=1 snippet / entities
    double snippet_coverage = 0.0;        // |pool| / (entities * results_per_query)
    double source_diversity = 0.0;        // unique domains / |pool|
    double inter_snippet_agreement = 1.0; // mean pairwise embedding cosine

    bool operator==(const RetrievalStats&) const = default;
};

struct ExtractionResult {
    std::string claim_id;
    std::vector<Entity> entities;  // deduplicated, model-output order
    std::string raw_model_output;
    std::string prompt_digest;  // digest of the extraction template used

    bool operator==(const ExtractionResult&) const = default;
};

// ---------------------------------------------------------------------------
// Credibility value set

// The seven allowed source-credibility scores, descending.
const std::array<double, 7>& allowed_credibility_values();
bool is_allowed_credibility(double c);

// ---------------------------------------------------------------------------
// Validation. Throws ValidationError naming the violated field.

void validate(const Claim& claim);
void validate(const Entity& entity);
void validate(const Snippet& snippet);
void validate(const ScoredSnippet& scored);
void validate(const Decision& decision);
void validate(const RetrievalStats& stats);
void validate(const ExtractionResult& result);

// ---------------------------------------------------------------------------
// Line records

using Record = std::variant<Claim, Entity, Snippet, ScoredSnippet, Decision, RetrievalStats,
                            ExtractionResult>;

// One-line JSON with "v" and "t". Lossless through parse_record.
std::string serialize_record(const Record& record);

// Throws RecordParseError for schema violations and ValidationError for
// invariant violations.
Record parse_record(const std::string& line);

template <typename T>
T parse_record_as(const std::string& line) {
    Record r = parse_record(line);
    if (!std::holds_alternative<T>(r)) {
        throw RecordParseError("record has unexpected type tag", "t");
    }
    return std::get<T>(std::move(r));
}

// Reads one record per non-empty line from a file. Throws ConfigError if the
// file cannot be opened.
std::vector<Record> read_records(const std::string& path);
void write_records(const std::string& path, const std::vector<Record>& records);

}  // namespace rave
