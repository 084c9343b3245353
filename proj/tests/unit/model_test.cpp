#include <doctest.h>

#include <random>

#include "rave/model.hpp"

using namespace rave;

namespace {

// Hand-rolled generators for the round-trip property.
struct Gen {
    std::mt19937_64 rng{20260810};

    int pick(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

    std::string string(int min_len = 1, int max_len = 24) {
        static const char alphabet[] =
            "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,!?%\"'\\/:-_";
        int len = min_len + pick(max_len - min_len + 1);
        std::string out;
        for (int i = 0; i < len; ++i) {
            out.push_back(alphabet[pick(sizeof(alphabet) - 1)]);
        }
        if (out.find_first_not_of(" \t") == std::string::npos) out += "x";
        return out;
    }

    Claim claim() {
        Claim c;
        c.id = "id-" + std::to_string(rng());
        c.text = string();
        if (pick(2) == 0) {
            c.gold_label = pick(2) == 0 ? VerifiabilityLabel::Verifiable
                                        : VerifiabilityLabel::NonVerifiable;
        }
        if (pick(2) == 0) c.source_dataset = string(1, 8);
        return c;
    }

    Entity entity() {
        return Entity{string(1, 12), kAllEntityKinds[pick(5)]};
    }

    Snippet snippet() {
        Snippet s;
        s.text = string();
        s.title = string();
        std::string host = "host" + std::to_string(pick(1000)) + ".example.org";
        s.url = "https://" + host + "/" + std::to_string(rng());
        s.domain = host;
        s.origin_entity = entity();
        s.rank_in_search = 1 + pick(10);
        return s;
    }

    ScoredSnippet scored() {
        ScoredSnippet s;
        s.snippet = snippet();
        s.relevance = -1.0 + 2.0 * (static_cast<double>(rng() % 10000) / 10000.0);
        s.credibility = allowed_credibility_values()[pick(7)];
        double alpha = static_cast<double>(rng() % 1000) / 1000.0;
        s.combined = alpha * s.relevance + (1 - alpha) * s.credibility;
        return s;
    }

    Decision decision() {
        Decision d;
        d.claim_id = "id-" + std::to_string(rng());
        d.strategy = kAllStrategies[pick(6)];
        d.label = pick(2) == 0 ? VerifiabilityLabel::Verifiable : VerifiabilityLabel::NonVerifiable;
        d.raw_model_output = string(0, 40);
        if (d.strategy != Strategy::TextOnly) {
            int n = pick(4);
            for (int i = 0; i < n; ++i) d.evidence_used.push_back(scored());
        }
        d.prompt_hash = "h" + std::to_string(rng());
        return d;
    }

    RetrievalStats stats() {
        RetrievalStats s;
        s.entity_count = pick(6);
        s.entity_coverage = s.entity_count == 0 ? 0.0 : pick(101) / 100.0;
        s.snippet_coverage = pick(101) / 100.0;
        s.source_diversity = pick(101) / 100.0;
        s.inter_snippet_agreement = -1.0 + pick(201) / 100.0;
        return s;
    }

    ExtractionResult extraction() {
        ExtractionResult e;
        e.claim_id = "id-" + std::to_string(rng());
        int n = pick(4);
        for (int i = 0; i < n; ++i) e.entities.push_back(entity());
        e.raw_model_output = string(0, 30);
        e.prompt_digest = "d" + std::to_string(rng());
        return e;
    }

    Record record() {
        switch (pick(7)) {
            case 0: return claim();
            case 1: return entity();
            case 2: return snippet();
            case 3: return scored();
            case 4: return decision();
            case 5: return stats();
            default: return extraction();
        }
    }
};

}  // namespace

TEST_CASE("labels serialize with the exact hyphenated forms") {
    CHECK(to_string(VerifiabilityLabel::Verifiable) == "VERIFIABLE");
    CHECK(to_string(VerifiabilityLabel::NonVerifiable) == "NON-VERIFIABLE");
    CHECK(label_from_string("VERIFIABLE") == VerifiabilityLabel::Verifiable);
    CHECK(label_from_string("NON-VERIFIABLE") == VerifiabilityLabel::NonVerifiable);
    CHECK(!label_from_string("NON_VERIFIABLE").has_value());
    CHECK(!label_from_string("verifiable").has_value());
}

TEST_CASE("claim record contains the label text") {
    Claim c{"c1", "x", VerifiabilityLabel::Verifiable, std::nullopt};
    std::string line = serialize_record(Record{c});
    CHECK(line.find("VERIFIABLE") != std::string::npos);
    CHECK(line.find('\n') == std::string::npos);

    Claim nv{"c2", "y", VerifiabilityLabel::NonVerifiable, std::nullopt};
    CHECK(serialize_record(Record{nv}).find("NON-VERIFIABLE") != std::string::npos);
}

TEST_CASE("parse round-trips serialize on 1000 randomized records") {
    Gen gen;
    for (int i = 0; i < 1000; ++i) {
        Record original = gen.record();
        std::string line = serialize_record(original);
        Record reparsed = parse_record(line);
        CHECK(reparsed == original);
        // And the serialized form itself is a fixed point.
        CHECK(serialize_record(reparsed) == line);
    }
}

TEST_CASE("malformed lines raise a parse error, not a crash") {
    CHECK_THROWS_AS(parse_record("not json"), RecordParseError);
    CHECK_THROWS_AS(parse_record("[1,2,3]"), RecordParseError);
    CHECK_THROWS_AS(parse_record("{\"v\":1}"), RecordParseError);
    CHECK_THROWS_AS(parse_record("{\"v\":99,\"t\":\"claim\"}"), RecordParseError);
    CHECK_THROWS_AS(parse_record("{\"v\":1,\"t\":\"mystery\"}"), RecordParseError);
    CHECK_THROWS_AS(parse_record("{\"v\":1,\"t\":\"claim\",\"id\":\"a\"}"), RecordParseError);
}

TEST_CASE("parse errors name the offending field") {
    try {
        parse_record("{\"v\":1,\"t\":\"claim\",\"id\":\"a\"}");
        FAIL("expected RecordParseError");
    } catch (const RecordParseError& e) {
        CHECK(e.field() == "text");
    }
}

TEST_CASE("credibility outside the seven-value set is a validation error") {
    Gen gen;
    ScoredSnippet s = gen.scored();
    s.credibility = 0.6;
    std::string line = serialize_record(Record{s});
    CHECK_THROWS_AS(parse_record(line), ValidationError);
}

TEST_CASE("empty claim text is a validation error") {
    CHECK_THROWS_AS(parse_record("{\"v\":1,\"t\":\"claim\",\"id\":\"a\",\"text\":\"  \"}"),
                    ValidationError);
    CHECK_THROWS_AS(validate(Claim{"a", "   ", std::nullopt, std::nullopt}), ValidationError);
}

TEST_CASE("the credibility value set is closed and exact") {
    for (double v : allowed_credibility_values()) CHECK(is_allowed_credibility(v));
    CHECK(!is_allowed_credibility(0.6));
    CHECK(!is_allowed_credibility(0.9500001));
    CHECK(!is_allowed_credibility(0.0));
}

TEST_CASE("TEXT_ONLY decisions must carry no evidence") {
    Gen gen;
    Decision d = gen.decision();
    d.strategy = Strategy::TextOnly;
    d.evidence_used = {gen.scored()};
    CHECK_THROWS_AS(validate(d), ValidationError);
}

TEST_CASE("retrieval stats invariants") {
    RetrievalStats ok{2, 0.5, 0.3, 1.0, 0.2};
    CHECK_NOTHROW(validate(ok));
    RetrievalStats zero_entities{0, 0.5, 0.0, 0.0, 1.0};
    CHECK_THROWS_AS(validate(zero_entities), ValidationError);
    RetrievalStats bad_range{1, 0.5, 1.5, 0.0, 1.0};
    CHECK_THROWS_AS(validate(bad_range), ValidationError);
}
