#include "rave/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rave/digest.hpp"
#include "rave/log.hpp"
#include "rave/text.hpp"

namespace rave {

// ---------------------------------------------------------------------------
// CredibilityTable

namespace {

std::optional<CredibilityRule::Matcher> matcher_from_string(const std::string& s) {
    if (s == "host") return CredibilityRule::Matcher::Host;
    if (s == "suffix") return CredibilityRule::Matcher::Suffix;
    if (s == "keyword") return CredibilityRule::Matcher::Keyword;
    if (s == "default") return CredibilityRule::Matcher::Default;
    return std::nullopt;
}

bool rule_matches(const CredibilityRule& rule, const std::string& domain) {
    switch (rule.matcher) {
        case CredibilityRule::Matcher::Host:
            return domain == rule.pattern ||
                   (domain.size() > rule.pattern.size() &&
                    domain.ends_with(rule.pattern) &&
                    domain[domain.size() - rule.pattern.size() - 1] == '.');
        case CredibilityRule::Matcher::Suffix:
            return domain.ends_with(rule.pattern);
        case CredibilityRule::Matcher::Keyword:
            return domain.find(rule.pattern) != std::string::npos;
        case CredibilityRule::Matcher::Default:
            return true;
    }
    return false;
}

}  // namespace

CredibilityTable CredibilityTable::parse(const std::string& text,
                                         const std::string& source_name) {
    CredibilityTable table;
    table.digest_ = sha256_hex(text);

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    int priority = 0;
    for (; std::getline(in, line); ++line_no) {
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;

        std::istringstream fields(stripped);
        std::string matcher_str, pattern;
        double score = 0.0;
        if (!(fields >> matcher_str >> pattern >> score)) {
            throw ValidationError(source_name + ":" + std::to_string(line_no + 1) +
                                  ": rule line must be '<matcher> <pattern> <score>'");
        }
        auto matcher = matcher_from_string(matcher_str);
        if (!matcher) {
            throw ValidationError(source_name + ": unknown matcher '" + matcher_str + "'");
        }
        if (!is_allowed_credibility(score)) {
            std::ostringstream msg;
            msg << source_name << ": score " << score << " is not one of the seven allowed values";
            throw ValidationError(msg.str());
        }
        CredibilityRule rule;
        rule.matcher = *matcher;
        rule.pattern = to_lower_ascii(pattern);
        rule.score = score;
        rule.priority = priority++;
        table.rules_.push_back(std::move(rule));
    }

    if (table.rules_.empty() ||
        table.rules_.back().matcher != CredibilityRule::Matcher::Default) {
        throw ValidationError(source_name + ": rule set must end with a default rule");
    }
    return table;
}

CredibilityTable CredibilityTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open credibility rule file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

double CredibilityTable::credibility(const std::string& domain) const {
    for (const CredibilityRule& rule : rules_) {
        if (rule_matches(rule, domain)) return rule.score;
    }
    // Unreachable: parse() guarantees a trailing default rule.
    return allowed_credibility_values().back();
}

// ---------------------------------------------------------------------------
// Relevance and combination

double relevance(std::span<const double> claim_embedding,
                 std::span<const double> snippet_embedding) {
    if (claim_embedding.size() != snippet_embedding.size()) {
        throw ConfigError("embedding dimensions differ: " +
                          std::to_string(claim_embedding.size()) + " vs " +
                          std::to_string(snippet_embedding.size()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < claim_embedding.size(); ++i) {
        dot += claim_embedding[i] * snippet_embedding[i];
        na += claim_embedding[i] * claim_embedding[i];
        nb += snippet_embedding[i] * snippet_embedding[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw UndefinedSimilarityError("cosine is undefined for a zero vector");
    }
    double cos = dot / (std::sqrt(na) * std::sqrt(nb));
    // Guard against rounding drift past the mathematical range.
    return std::clamp(cos, -1.0, 1.0);
}

double combined_score(double r, double c, double alpha) { return alpha * r + (1.0 - alpha) * c; }

// ---------------------------------------------------------------------------
// Pool scoring

std::vector<ScoredSnippet> score_from_embeddings(
    const ContextPool& pool, const std::vector<double>& claim_embedding,
    const std::vector<std::vector<double>>& snippet_embeddings, const CredibilityTable& table,
    const ScoringConfig& config, ScoringDrops* drops) {
    if (snippet_embeddings.size() != pool.snippets.size()) {
        throw ConfigError("snippet embedding count does not match pool size");
    }

    std::vector<ScoredSnippet> scored;
    scored.reserve(pool.snippets.size());
    for (std::size_t i = 0; i < pool.snippets.size(); ++i) {
        double r;
        try {
            r = relevance(claim_embedding, snippet_embeddings[i]);
        } catch (const Error& e) {
            if (drops) ++drops->embedding_failures;
            log::warn("dropping snippet with unusable embedding (" + std::string(e.what()) +
                      "): " + pool.snippets[i].url);
            continue;
        }
        ScoredSnippet s;
        s.snippet = pool.snippets[i];
        s.relevance = r;
        s.credibility = table.credibility(s.snippet.domain);
        s.combined = combined_score(s.relevance, s.credibility, config.alpha);
        scored.push_back(std::move(s));
    }
    return scored;
}

std::vector<ScoredSnippet> score_pool(Gateway& gateway, const Claim& claim,
                                      const ContextPool& pool, const CredibilityTable& table,
                                      const ScoringConfig& config, ScoringDrops* drops) {
    if (pool.snippets.empty()) return {};

    // One embedding batch: claim first, then every snippet text. The claim is
    // embedded exactly once per claim.
    std::vector<std::string> texts;
    texts.reserve(pool.snippets.size() + 1);
    texts.push_back(claim.text);
    for (const Snippet& s : pool.snippets) texts.push_back(s.text);
    auto embeddings = gateway.embed(texts);

    std::vector<std::vector<double>> snippet_embeddings(embeddings.begin() + 1, embeddings.end());
    return score_from_embeddings(pool, embeddings.front(), snippet_embeddings, table, config,
                                 drops);
}

std::vector<ScoredSnippet> select_top_k(std::vector<ScoredSnippet> scored, int k) {
    if (k < 1) throw ConfigError("top-k selection requires k >= 1");
    std::stable_sort(scored.begin(), scored.end(),
                     [](const ScoredSnippet& a, const ScoredSnippet& b) {
                         if (a.combined != b.combined) return a.combined > b.combined;
                         if (a.credibility != b.credibility) return a.credibility > b.credibility;
                         return a.snippet.rank_in_search < b.snippet.rank_in_search;
                     });
    if (static_cast<int>(scored.size()) > k) scored.resize(k);
    return scored;
}

}  // namespace rave
