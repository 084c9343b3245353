#pragma once
// Snippet scoring: relevance via embedding cosine, credibility via the
// priority-ordered domain rule table, combined score as a plain convex
// combination, and deterministic top-K selection.
//
// Relevance and credibility are combined raw; cosine is not renormalized
// onto the credibility range. All functions here are pure over immutable
// inputs.

#include <span>
#include <string>
#include <vector>

#include "rave/gateway.hpp"
#include "rave/model.hpp"
#include "rave/retrieval.hpp"

namespace rave {

struct ScoringConfig {
    double alpha = 0.6;  // weight on relevance; 1-alpha on credibility
    int k = 3;           // snippets kept by selection
};

struct CredibilityRule {
    enum class Matcher { Host, Suffix, Keyword, Default };
    Matcher matcher = Matcher::Default;
    std::string pattern;  // lowercase; unused for Default
    double score = 0.40;  // one of the seven allowed values
    int priority = 0;     // file order; lower wins
};

// Priority-ordered rule table. The rule file has one rule per line
// ("<matcher> <pattern> <score>"), highest priority first, and must end
// with a default rule so every hostname is covered. Subdomains inherit a
// host rule ("news.bbc.co.uk" matches a "bbc.co.uk" entry).
class CredibilityTable {
public:
    static CredibilityTable parse(const std::string& text, const std::string& source_name);
    static CredibilityTable load(const std::string& path);

    // Score of the highest-priority matching rule; total via the default rule.
    double credibility(const std::string& domain) const;

    const std::vector<CredibilityRule>& rules() const { return rules_; }
    const std::string& digest() const { return digest_; }

private:
    std::vector<CredibilityRule> rules_;
    std::string digest_;
};

// Cosine similarity. Throws UndefinedSimilarityError on a zero vector and
// ConfigError on a dimension mismatch.
double relevance(std::span<const double> claim_embedding,
                 std::span<const double> snippet_embedding);

// Exactly alpha*r + (1-alpha)*c.
double combined_score(double r, double c, double alpha);

struct ScoringDrops {
    int embedding_failures = 0;  // snippets dropped for unusable embeddings
};

// Scores every pool snippet from precomputed embeddings, dropping snippets
// whose embedding is unusable (zero vector or wrong dimension).
std::vector<ScoredSnippet> score_from_embeddings(
    const ContextPool& pool, const std::vector<double>& claim_embedding,
    const std::vector<std::vector<double>>& snippet_embeddings, const CredibilityTable& table,
    const ScoringConfig& config, ScoringDrops* drops = nullptr);

// Convenience wrapper: embeds the claim (once) and all snippets through the
// gateway, then scores.
std::vector<ScoredSnippet> score_pool(Gateway& gateway, const Claim& claim,
                                      const ContextPool& pool, const CredibilityTable& table,
                                      const ScoringConfig& config, ScoringDrops* drops = nullptr);

// The min(k, n) snippets with the largest combined score, sorted descending.
// Ties break by higher credibility, then lower rank_in_search, then input
// order, which makes selection fully deterministic.
std::vector<ScoredSnippet> select_top_k(std::vector<ScoredSnippet> scored, int k);

}  // namespace rave
