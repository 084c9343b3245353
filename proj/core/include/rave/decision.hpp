#pragma once
// Verifiability decision: one shared prompt template for every strategy,
// with a strategy-dependent evidence block, and strict structured verdict
// parsing with a single repair re-prompt.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rave/gateway.hpp"
#include "rave/model.hpp"
#include "rave/prompt.hpp"
#include "rave/retrieval.hpp"
#include "rave/scoring.hpp"

namespace rave {

struct StrategyInput {
    Strategy strategy = Strategy::Rave;
    Claim claim;
    std::vector<ScoredSnippet> evidence;   // empty for TEXT_ONLY and RAVE_STATS
    std::optional<RetrievalStats> stats;   // RAVE_STATS only
    bool include_snippet_text = true;      // false for RAVE_META
    bool include_scores = true;            // false for RAND_K / SEARCH_K
    std::optional<std::uint64_t> rng_seed; // RAND_K only
};

// Deterministic partial Fisher-Yates draw of k distinct indices from [0, n),
// returned in ascending order. The generator sequence is fully specified, so
// results are identical on every platform.
std::vector<int> sample_without_replacement(int n, int k, std::uint64_t seed);

// Builds the evidence view each strategy feeds the shared template:
//   TEXT_ONLY  - no evidence at all
//   RAND_K     - k snippets sampled uniformly without replacement (seeded)
//   SEARCH_K   - first k by (entity order, engine rank)
//   RAVE_STATS - no snippets; aggregated retrieval statistics instead
//   RAVE_META  - top-k by combined score, snippet text withheld
//   RAVE       - top-k by combined score with text, metadata, and scores
// RAND_K without a seed is a configuration error; RAVE_STATS requires the
// caller to supply precomputed stats.
StrategyInput assemble_evidence(Strategy strategy, const Claim& claim, const ContextPool& pool,
                                const std::vector<ScoredSnippet>& scored,
                                const ScoringConfig& config,
                                std::optional<std::uint64_t> rng_seed,
                                std::optional<RetrievalStats> stats = std::nullopt);

// Aggregated retrieval statistics over the full pool. Agreement is the mean
// pairwise cosine of snippet embeddings and is defined as 1.0 for pools with
// fewer than two usable embeddings.
RetrievalStats compute_stats(const std::vector<Entity>& entities, const ContextPool& pool,
                             const std::vector<std::vector<double>>& snippet_embeddings,
                             int results_per_query);

// Strategy-dependent evidence section. Relevance renders to 4 decimals,
// credibility to 2.
std::string render_evidence_block(const StrategyInput& input);

// Shared template with {{claim}} and {{evidence}} slots; strategies differ
// only in the evidence block.
std::string render_decision_prompt(const PromptTemplate& tpl, const StrategyInput& input);

struct DecisionDrops {
    int repairs = 0;
};

// Renders the prompt, queries the LLM, and parses the structured verdict.
// Tolerates prose around the JSON block but requires the block. One repair
// re-prompt; persistent failure throws DecisionFormatError.
Decision decide(Gateway& gateway, const PromptTemplate& tpl, const StrategyInput& input,
                DecisionDrops* drops = nullptr);

// Verdict-block parser, exposed for tests.
std::optional<VerifiabilityLabel> parse_verdict(const std::string& raw);

}  // namespace rave
