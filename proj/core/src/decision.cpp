#include "rave/decision.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "rave/digest.hpp"
#include "rave/log.hpp"
#include "rave/text.hpp"

namespace rave {

using jsonu::json;

namespace {

constexpr const char* kRepairReminder =
    "\n\nREMINDER: respond with exactly one JSON object of the form "
    "{\"label\": \"VERIFIABLE\" or \"NON-VERIFIABLE\", \"rationale\": \"...\"} "
    "and nothing else.";

std::string format_double(double value, int decimals) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

// Draws from the standardized mt19937_64 sequence with rejection sampling,
// so bounded values do not depend on the standard library's distribution
// implementation.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t raw;
    do {
        raw = rng();
    } while (raw >= limit);
    return raw % bound;
}

int entity_order_index(const ContextPool& pool, const Entity& entity) {
    for (std::size_t i = 0; i < pool.per_entity_counts.size(); ++i) {
        if (pool.per_entity_counts[i].entity == entity) return static_cast<int>(i);
    }
    return static_cast<int>(pool.per_entity_counts.size());
}

}  // namespace

std::vector<int> sample_without_replacement(int n, int k, std::uint64_t seed) {
    if (n < 0 || k < 0) throw ConfigError("sample_without_replacement requires n, k >= 0");
    k = std::min(k, n);
    std::vector<int> indices(n);
    for (int i = 0; i < n; ++i) indices[i] = i;

    std::mt19937_64 rng(seed);
    for (int i = 0; i < k; ++i) {
        int j = i + static_cast<int>(bounded_draw(rng, static_cast<std::uint64_t>(n - i)));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(k);
    std::sort(indices.begin(), indices.end());
    return indices;
}

StrategyInput assemble_evidence(Strategy strategy, const Claim& claim, const ContextPool& pool,
                                const std::vector<ScoredSnippet>& scored,
                                const ScoringConfig& config,
                                std::optional<std::uint64_t> rng_seed,
                                std::optional<RetrievalStats> stats) {
    StrategyInput input;
    input.strategy = strategy;
    input.claim = claim;

    switch (strategy) {
        case Strategy::TextOnly:
            input.include_snippet_text = false;
            input.include_scores = false;
            break;

        case Strategy::RandK: {
            if (!rng_seed) {
                throw ConfigError("RAND_K requires an rng seed; reproducibility is mandatory");
            }
            input.rng_seed = rng_seed;
            input.include_scores = false;
            auto picks = sample_without_replacement(static_cast<int>(scored.size()), config.k,
                                                    *rng_seed);
            for (int i : picks) input.evidence.push_back(scored[i]);
            break;
        }

        case Strategy::SearchK: {
            input.include_scores = false;
            std::vector<ScoredSnippet> by_engine = scored;
            std::stable_sort(by_engine.begin(), by_engine.end(),
                             [&pool](const ScoredSnippet& a, const ScoredSnippet& b) {
                                 int ea = entity_order_index(pool, a.snippet.origin_entity);
                                 int eb = entity_order_index(pool, b.snippet.origin_entity);
                                 if (ea != eb) return ea < eb;
                                 return a.snippet.rank_in_search < b.snippet.rank_in_search;
                             });
            if (static_cast<int>(by_engine.size()) > config.k) by_engine.resize(config.k);
            input.evidence = std::move(by_engine);
            break;
        }

        case Strategy::RaveStats:
            if (!stats) {
                throw ConfigError("RAVE_STATS requires precomputed retrieval statistics");
            }
            input.stats = stats;
            input.include_snippet_text = false;
            input.include_scores = false;
            break;

        case Strategy::RaveMeta:
            input.include_snippet_text = false;
            input.include_scores = true;
            input.evidence = select_top_k(scored, config.k);
            break;

        case Strategy::Rave:
            input.include_snippet_text = true;
            input.include_scores = true;
            input.evidence = select_top_k(scored, config.k);
            break;
    }
    return input;
}

RetrievalStats compute_stats(const std::vector<Entity>& entities, const ContextPool& pool,
                             const std::vector<std::vector<double>>& snippet_embeddings,
                             int results_per_query) {
    RetrievalStats stats;
    stats.entity_count = static_cast<int>(entities.size());

    if (stats.entity_count > 0) {
        int covered = 0;
        for (const PerEntityCount& row : pool.per_entity_counts) {
            if (row.count > 0) ++covered;
        }
        stats.entity_coverage =
            static_cast<double>(covered) / static_cast<double>(stats.entity_count);

        double denom = static_cast<double>(stats.entity_count) * results_per_query;
        stats.snippet_coverage =
            std::clamp(static_cast<double>(pool.snippets.size()) / denom, 0.0, 1.0);
    }

    if (!pool.snippets.empty()) {
        std::set<std::string> domains;
        for (const Snippet& s : pool.snippets) domains.insert(s.domain);
        stats.source_diversity =
            static_cast<double>(domains.size()) / static_cast<double>(pool.snippets.size());
    }

    // Mean pairwise cosine; zero vectors are skipped as unusable.
    std::vector<const std::vector<double>*> usable;
    for (const auto& v : snippet_embeddings) {
        double norm = 0.0;
        for (double x : v) norm += x * x;
        if (norm > 0.0) usable.push_back(&v);
    }
    if (usable.size() >= 2) {
        double sum = 0.0;
        int pairs = 0;
        for (std::size_t i = 0; i < usable.size(); ++i) {
            for (std::size_t j = i + 1; j < usable.size(); ++j) {
                sum += relevance(*usable[i], *usable[j]);
                ++pairs;
            }
        }
        stats.inter_snippet_agreement = sum / pairs;
    } else {
        stats.inter_snippet_agreement = 1.0;  // perfect self-agreement for |pool| <= 1
    }
    return stats;
}

std::string render_evidence_block(const StrategyInput& input) {
    if (input.strategy == Strategy::TextOnly) {
        return "(no external context provided)";
    }
    if (input.strategy == Strategy::RaveStats) {
        const RetrievalStats& s = *input.stats;
        std::ostringstream out;
        out << "Retrieval statistics:\n";
        out << "- entity_count: " << s.entity_count << "\n";
        out << "- entity_coverage: " << format_double(s.entity_coverage, 4) << "\n";
        out << "- snippet_coverage: " << format_double(s.snippet_coverage, 4) << "\n";
        out << "- source_diversity: " << format_double(s.source_diversity, 4) << "\n";
        out << "- inter_snippet_agreement: " << format_double(s.inter_snippet_agreement, 4);
        return out.str();
    }
    if (input.evidence.empty()) {
        return "(no snippets retrieved)";
    }

    std::ostringstream out;
    for (std::size_t i = 0; i < input.evidence.size(); ++i) {
        const ScoredSnippet& item = input.evidence[i];
        if (i > 0) out << "\n";
        out << "[" << (i + 1) << "] domain: " << item.snippet.domain
            << " | title: " << item.snippet.title;
        if (input.include_scores) {
            out << " | relevance: " << format_double(item.relevance, 4)
                << " | credibility: " << format_double(item.credibility, 2);
        }
        if (input.include_snippet_text) {
            out << "\n    text: " << item.snippet.text;
        }
    }
    return out.str();
}

std::string render_decision_prompt(const PromptTemplate& tpl, const StrategyInput& input) {
    return tpl.render({{"claim", input.claim.text}, {"evidence", render_evidence_block(input)}});
}

std::optional<VerifiabilityLabel> parse_verdict(const std::string& raw) {
    auto block = jsonu::find_json_object(raw);
    if (!block || !block->contains("label") || !(*block)["label"].is_string()) {
        return std::nullopt;
    }
    return label_from_string(trim((*block)["label"].get<std::string>()));
}

Decision decide(Gateway& gateway, const PromptTemplate& tpl, const StrategyInput& input,
                DecisionDrops* drops) {
    std::string prompt = render_decision_prompt(tpl, input);
    std::string raw = gateway.chat(prompt);

    auto label = parse_verdict(raw);
    if (!label) {
        if (drops) ++drops->repairs;
        log::warn("decision output unparseable for claim " + input.claim.id +
                  "; re-prompting once");
        raw = gateway.chat(prompt + kRepairReminder);
        label = parse_verdict(raw);
        if (!label) {
            throw DecisionFormatError(
                "decision output for claim " + input.claim.id + " has no parseable verdict", raw);
        }
    }

    Decision decision;
    decision.claim_id = input.claim.id;
    decision.strategy = input.strategy;
    decision.label = *label;
    decision.raw_model_output = raw;
    decision.evidence_used = input.evidence;
    // Hash of the original rendered prompt, repair or not.
    decision.prompt_hash = sha256_hex(normalize_prompt(prompt));
    return decision;
}

}  // namespace rave
