#include <doctest.h>

#include <algorithm>
#include <random>

#include "rave/scoring.hpp"
#include "test_support.hpp"

using namespace rave;
using rave::testing::ScriptedBackend;
using rave::testing::fresh_dir;
using rave::testing::make_result;

namespace {

CredibilityTable load_rules() {
    return CredibilityTable::load(std::string(RAVE_SOURCE_DIR) + "/assets/credibility_rules_v1.txt");
}

// Independent selection oracle: repeated linear scan picking the best
// remaining snippet under the documented tie rules. Deliberately a
// different algorithm from the library's sort-based implementation.
std::vector<ScoredSnippet> oracle_top_k(std::vector<ScoredSnippet> pool, int k) {
    std::vector<ScoredSnippet> out;
    while (static_cast<int>(out.size()) < k && !pool.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < pool.size(); ++i) {
            const ScoredSnippet& a = pool[i];
            const ScoredSnippet& b = pool[best];
            bool wins = false;
            if (a.combined != b.combined) {
                wins = a.combined > b.combined;
            } else if (a.credibility != b.credibility) {
                wins = a.credibility > b.credibility;
            } else if (a.snippet.rank_in_search != b.snippet.rank_in_search) {
                wins = a.snippet.rank_in_search < b.snippet.rank_in_search;
            }
            if (wins) best = i;
        }
        out.push_back(pool[best]);
        pool.erase(pool.begin() + best);
    }
    return out;
}

ScoredSnippet snip(double relevance, double credibility, int rank, const std::string& url_tag,
                   double alpha = 0.6) {
    ScoredSnippet s;
    s.snippet.text = "text " + url_tag;
    s.snippet.title = "title";
    s.snippet.domain = "example.org";
    s.snippet.url = "https://example.org/" + url_tag;
    s.snippet.origin_entity = Entity{"e", EntityKind::Org};
    s.snippet.rank_in_search = rank;
    s.relevance = relevance;
    s.credibility = credibility;
    s.combined = combined_score(relevance, credibility, alpha);
    return s;
}

std::vector<ScoredSnippet> random_pool(std::mt19937_64& rng, int n, double alpha) {
    std::vector<ScoredSnippet> pool;
    for (int i = 0; i < n; ++i) {
        double r = -1.0 + 2.0 * (static_cast<double>(rng() % 100000) / 100000.0);
        double c = allowed_credibility_values()[rng() % 7];
        ScoredSnippet s = snip(r, c, 1 + static_cast<int>(rng() % 10), std::to_string(i), alpha);
        pool.push_back(s);
    }
    return pool;
}

}  // namespace

// ---------------------------------------------------------------------------
// Relevance

TEST_CASE("cosine oracle values") {
    std::vector<double> v{0.3, -0.7, 2.0};
    CHECK(relevance(v, v) == doctest::Approx(1.0).epsilon(1e-9));

    std::vector<double> e1{1.0, 0.0}, e2{0.0, 1.0};
    CHECK(relevance(e1, e2) == doctest::Approx(0.0));

    std::vector<double> a{1.0, 1.0}, b{1.0, 0.0};
    CHECK(relevance(a, b) == doctest::Approx(0.7071).epsilon(1e-4));
}

TEST_CASE("cosine is symmetric and scale-invariant") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> u(8), v(8);
        for (int i = 0; i < 8; ++i) {
            u[i] = -1.0 + 2.0 * (static_cast<double>(rng() % 1000) / 1000.0);
            v[i] = -1.0 + 2.0 * (static_cast<double>(rng() % 1000) / 1000.0);
        }
        u[0] += 0.001;  // keep vectors nonzero
        v[0] += 0.001;
        double base = relevance(u, v);
        CHECK(relevance(v, u) == doctest::Approx(base).epsilon(1e-12));

        double lambda = 0.25 + static_cast<double>(rng() % 100) / 10.0;
        double mu = 0.25 + static_cast<double>(rng() % 100) / 10.0;
        std::vector<double> lu = u, mv = v;
        for (double& x : lu) x *= lambda;
        for (double& x : mv) x *= mu;
        CHECK(relevance(lu, mv) == doctest::Approx(base).epsilon(1e-9));
        CHECK(base >= -1.0);
        CHECK(base <= 1.0);
    }
}

TEST_CASE("zero vectors make similarity undefined") {
    std::vector<double> z{0.0, 0.0}, v{1.0, 2.0};
    CHECK_THROWS_AS(relevance(z, v), UndefinedSimilarityError);
    CHECK_THROWS_AS(relevance(v, z), UndefinedSimilarityError);
    std::vector<double> w{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(relevance(v, w), ConfigError);
}

// ---------------------------------------------------------------------------
// Credibility

TEST_CASE("25-domain credibility vector covers every rule tier and overlap") {
    CredibilityTable table = load_rules();
    const std::pair<const char*, double> vector_25[] = {
        {"en.wikipedia.org", 1.00},        // subdomain of an allowlisted host
        {"wikipedia.org", 1.00},           // allowlist beats the .org rule
        {"reuters.com", 1.00},             // allowlist beats the .com rule
        {"news.bbc.co.uk", 1.00},          // subdomain inherits; beats "news" keyword
        {"bbc.com", 1.00},
        {"nature.com", 1.00},
        {"who.int", 1.00},                 // documented extension list
        {"un.org", 1.00},
        {"cdc.gov", 0.95},
        {"data.census.gov", 0.95},         // suffix applies to subdomains
        {"harvard.edu", 0.95},
        {"ox.ac.uk", 0.85},                // academic host pattern
        {"stanford-university.org", 0.85}, // keyword beats .org
        {"pasteur-institute.org", 0.85},
        {"academy-of-science.org", 0.85},
        {"researchgate.net", 0.85},
        {"nytimes.com", 0.75},             // keyword beats .com
        {"washingtonpost.com", 0.75},
        {"apnews.com", 0.75},
        {"courier-journal.com", 0.75},
        {"redcross.org", 0.65},
        {"wsj.com", 0.50},                 // no keyword; plain .com
        {"medium.com", 0.50},
        {"shop-anything.xyz", 0.40},
        {"viral-truth.net", 0.40},
    };
    for (const auto& [domain, expected] : vector_25) {
        CAPTURE(domain);
        CHECK(table.credibility(domain) == expected);
    }
}

TEST_CASE("every rule score is in the closed seven-value set") {
    CredibilityTable table = load_rules();
    for (const CredibilityRule& rule : table.rules()) {
        CHECK(is_allowed_credibility(rule.score));
    }
}

TEST_CASE("rule files reject scores outside the set and require a default") {
    CHECK_THROWS_AS(CredibilityTable::parse("host x.com 0.60\ndefault * 0.40\n", "test"),
                    ValidationError);
    CHECK_THROWS_AS(CredibilityTable::parse("host x.com 1.00\n", "test"), ValidationError);
    CHECK_THROWS_AS(CredibilityTable::parse("wildcard x 0.40\ndefault * 0.40\n", "test"),
                    ValidationError);
}

// ---------------------------------------------------------------------------
// Combined score

TEST_CASE("combined score oracle values") {
    CHECK(combined_score(1.0, 1.0, 0.0) == 1.0);
    CHECK(combined_score(1.0, 1.0, 0.37) == 1.0);
    CHECK(combined_score(1.0, 1.0, 1.0) == 1.0);
    CHECK(combined_score(0.5, 0.75, 0.6) == doctest::Approx(0.60).epsilon(1e-12));
    // alpha = 0 reduces to credibility for any relevance.
    for (double r : {-1.0, -0.2, 0.0, 0.9}) CHECK(combined_score(r, 0.85, 0.0) == 0.85);
}

TEST_CASE("combined score is exactly the convex combination, 10000 triples") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10000; ++i) {
        double r = -1.0 + 2.0 * (static_cast<double>(rng() % 100000) / 100000.0);
        double c = allowed_credibility_values()[rng() % 7];
        double alpha = static_cast<double>(rng() % 100001) / 100000.0;
        CHECK(combined_score(r, c, alpha) == alpha * r + (1.0 - alpha) * c);
    }
}

// ---------------------------------------------------------------------------
// Top-K selection

TEST_CASE("n <= k returns everything, sorted") {
    auto pool = {snip(0.1, 0.40, 1, "a"), snip(0.9, 0.40, 2, "b")};
    auto top = select_top_k(std::vector<ScoredSnippet>(pool), 5);
    REQUIRE(top.size() == 2);
    CHECK(top[0].snippet.url.ends_with("/b"));
    CHECK(top[1].snippet.url.ends_with("/a"));
}

TEST_CASE("combined ties break by credibility, then engine rank") {
    // combined 0.9, 0.8, 0.8, 0.1 with the tied pair differing in credibility.
    std::vector<ScoredSnippet> pool = {snip(0, 0, 9, "w"), snip(0, 0, 1, "x"),
                                       snip(0, 0, 2, "y"), snip(0, 0, 3, "z")};
    pool[0].combined = 0.9;
    pool[0].credibility = 0.50;
    pool[1].combined = 0.8;
    pool[1].credibility = 0.65;  // tied pair, higher credibility
    pool[2].combined = 0.8;
    pool[2].credibility = 0.50;
    pool[3].combined = 0.1;
    pool[3].credibility = 1.00;

    auto top = select_top_k(pool, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].snippet.url.ends_with("/w"));
    CHECK(top[1].snippet.url.ends_with("/x"));  // credibility broke the tie

    // Full-tie fallback: lower engine rank wins.
    pool[1].credibility = 0.50;
    top = select_top_k(pool, 2);
    CHECK(top[1].snippet.url.ends_with("/x"));  // rank 1 beats rank 2

    // Brute-force oracle agrees on the whole ordering.
    auto expected = oracle_top_k(pool, 4);
    auto actual = select_top_k(pool, 4);
    CHECK(actual == expected);
}

TEST_CASE("selection agrees with the brute-force oracle on random pools") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 300; ++trial) {
        auto pool = random_pool(rng, 1 + static_cast<int>(rng() % 12), 0.6);
        int k = 1 + static_cast<int>(rng() % 6);
        CHECK(select_top_k(pool, k) == oracle_top_k(pool, k));
    }
}

TEST_CASE("permuting strictly-distinct scores never changes the selection") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 200; ++trial) {
        auto pool = random_pool(rng, 8, 0.6);
        // Force strictly distinct combined scores.
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i].combined += i * 1e-7;
        int k = 3;
        auto baseline = select_top_k(pool, k);
        auto shuffled = pool;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(select_top_k(shuffled, k) == baseline);
    }
}

TEST_CASE("raising relevance never lowers a snippet's rank (alpha > 0)") {
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 200; ++trial) {
        double alpha = 0.6;
        auto pool = random_pool(rng, 10, alpha);
        std::size_t target = rng() % pool.size();
        std::string url = pool[target].snippet.url;

        auto rank_of = [&](const std::vector<ScoredSnippet>& ordered) {
            for (std::size_t i = 0; i < ordered.size(); ++i) {
                if (ordered[i].snippet.url == url) return i;
            }
            return ordered.size();
        };
        auto before = select_top_k(pool, 10);
        std::size_t rank_before = rank_of(before);

        pool[target].relevance = std::min(1.0, pool[target].relevance + 0.25);
        pool[target].combined =
            combined_score(pool[target].relevance, pool[target].credibility, alpha);
        auto after = select_top_k(pool, 10);
        CHECK(rank_of(after) <= rank_before);
    }
}

TEST_CASE("alpha boundaries reduce to single-signal rankings on 1000 pools") {
    std::mt19937_64 rng(45);
    for (int trial = 0; trial < 1000; ++trial) {
        int n = 2 + static_cast<int>(rng() % 10);

        // alpha = 1: ranking equals pure-relevance ranking.
        auto pool_rel = random_pool(rng, n, 1.0);
        auto by_alpha = select_top_k(pool_rel, n);
        auto pure = pool_rel;
        for (ScoredSnippet& s : pure) s.combined = s.relevance;
        auto by_relevance = select_top_k(pure, n);
        REQUIRE(by_alpha.size() == by_relevance.size());
        for (std::size_t i = 0; i < by_alpha.size(); ++i) {
            CHECK(by_alpha[i].snippet.url == by_relevance[i].snippet.url);
        }

        // alpha = 0: ranking equals pure-credibility ranking.
        auto pool_cred = random_pool(rng, n, 0.0);
        auto by_alpha0 = select_top_k(pool_cred, n);
        auto pure_cred = pool_cred;
        for (ScoredSnippet& s : pure_cred) s.combined = s.credibility;
        auto by_credibility = select_top_k(pure_cred, n);
        for (std::size_t i = 0; i < by_alpha0.size(); ++i) {
            CHECK(by_alpha0[i].snippet.url == by_credibility[i].snippet.url);
        }
    }
}

TEST_CASE("k below one is rejected") {
    CHECK_THROWS_AS(select_top_k({}, 0), ConfigError);
}

// ---------------------------------------------------------------------------
// Pool scoring

TEST_CASE("empty pools score to empty lists") {
    GatewayConfig cfg;
    cfg.mode = GatewayMode::Record;
    cfg.cache_dir = fresh_dir("scoring_empty");
    Gateway gateway(cfg, std::make_unique<ScriptedBackend>());
    ContextPool pool{"c1", {}, {}};
    Claim claim{"c1", "anything", std::nullopt, std::nullopt};
    CHECK(score_pool(gateway, claim, pool, load_rules(), ScoringConfig{}).empty());
}

TEST_CASE("scored pools match an independent recomputation") {
    // Fixture pool of 6 snippets; r, c, and combined recomputed externally
    // from first principles and compared field by field.
    auto backend = std::make_unique<ScriptedBackend>();
    std::vector<std::string> texts = {"claim text", "s0", "s1", "s2", "s3", "s4", "s5"};
    std::vector<std::vector<double>> vecs = {
        {1.0, 0.0, 0.0}, {1.0, 0.0, 0.0},  {0.0, 1.0, 0.0}, {0.6, 0.8, 0.0},
        {-1.0, 0.0, 0.0}, {0.5, 0.5, 0.0}, {2.0, 0.0, 0.0},
    };
    for (std::size_t i = 0; i < texts.size(); ++i) backend->embeddings[texts[i]] = vecs[i];

    const char* domains[] = {"en.wikipedia.org", "cdc.gov",    "pasteur-institute.org",
                             "nytimes.com",      "redcross.org", "viral-truth.net"};
    ContextPool pool;
    pool.claim_id = "c1";
    for (int i = 0; i < 6; ++i) {
        Snippet s;
        s.text = "s" + std::to_string(i);
        s.title = "t";
        s.domain = domains[i];
        s.url = std::string("https://") + domains[i] + "/p";
        s.origin_entity = Entity{"e", EntityKind::Org};
        s.rank_in_search = i + 1;
        pool.snippets.push_back(s);
    }

    GatewayConfig cfg;
    cfg.mode = GatewayMode::Record;
    cfg.cache_dir = fresh_dir("scoring_recompute");
    Gateway gateway(cfg, std::move(backend));
    Claim claim{"c1", "claim text", std::nullopt, std::nullopt};
    ScoringConfig scoring{0.6, 3};
    auto scored = score_pool(gateway, claim, pool, load_rules(), scoring);

    REQUIRE(scored.size() == 6);
    const double expected_r[] = {1.0, 0.0, 0.6, -1.0, 0.5 / std::sqrt(0.5), 1.0};
    const double expected_c[] = {1.00, 0.95, 0.85, 0.75, 0.65, 0.40};
    for (int i = 0; i < 6; ++i) {
        CAPTURE(i);
        CHECK(scored[i].relevance == doctest::Approx(expected_r[i]).epsilon(1e-9));
        CHECK(scored[i].credibility == expected_c[i]);
        CHECK(scored[i].combined ==
              doctest::Approx(0.6 * expected_r[i] + 0.4 * expected_c[i]).epsilon(1e-9));
        CHECK_NOTHROW(validate(scored[i]));
    }
}

TEST_CASE("snippets with zero-vector embeddings are dropped and counted") {
    auto backend = std::make_unique<ScriptedBackend>();
    backend->embeddings["claim text"] = {1.0, 0.0};
    backend->embeddings["good"] = {0.5, 0.5};
    backend->embeddings["broken"] = {0.0, 0.0};

    ContextPool pool;
    pool.claim_id = "c1";
    for (const char* text : {"good", "broken"}) {
        Snippet s;
        s.text = text;
        s.title = "t";
        s.domain = "bbc.com";
        s.url = std::string("https://bbc.com/") + text;
        s.origin_entity = Entity{"e", EntityKind::Org};
        s.rank_in_search = 1;
        pool.snippets.push_back(s);
    }

    GatewayConfig cfg;
    cfg.mode = GatewayMode::Record;
    cfg.cache_dir = fresh_dir("scoring_drop");
    Gateway gateway(cfg, std::move(backend));
    Claim claim{"c1", "claim text", std::nullopt, std::nullopt};
    ScoringDrops drops;
    auto scored = score_pool(gateway, claim, pool, load_rules(), ScoringConfig{}, &drops);
    REQUIRE(scored.size() == 1);
    CHECK(scored[0].snippet.text == "good");
    CHECK(drops.embedding_failures == 1);
}
