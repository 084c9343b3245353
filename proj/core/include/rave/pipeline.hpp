#pragma once
// End-to-end orchestration: extract -> retrieve -> score -> select -> decide
// per claim, with per-claim error isolation, a bounded worker pool, and a
// run manifest carrying full provenance. Output files are written by a
// single collector in claim-id order, so repeated REPLAY runs are
// byte-identical.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rave/backends.hpp"
#include "rave/config.hpp"
#include "rave/decision.hpp"
#include "rave/extraction.hpp"
#include "rave/gateway.hpp"
#include "rave/model.hpp"
#include "rave/prompt.hpp"
#include "rave/retrieval.hpp"
#include "rave/scoring.hpp"

namespace rave {

struct StageCounters {
    int claims = 0;
    int claims_failed = 0;  // terminal per-claim errors
    int entities = 0;
    int entities_unknown_kind_dropped = 0;
    int entities_hallucinated_dropped = 0;
    int extraction_failures = 0;  // claims downgraded to zero entities
    int snippets = 0;
    int snippets_dropped_embedding = 0;
    int search_failures = 0;  // per-entity queries that failed
    int decisions = 0;
    int unparseable_decisions = 0;
    int llm_repairs = 0;

    void merge(const StageCounters& other);
};

struct RunManifest {
    std::map<std::string, std::string> config;  // effective config echo
    std::string extraction_template_digest;
    std::string decision_template_digest;
    std::string credibility_rules_digest;
    std::string cache_digest;
    std::string backend_name;
    std::string started_at;
    std::string finished_at;
    StageCounters counters;
    std::vector<std::string> claim_errors;  // "claim_id: message"

    std::string to_json() const;
    static RunManifest from_json(const std::string& text);
};

struct ClaimOutcome {
    std::string claim_id;
    ExtractionResult extraction;
    std::optional<RetrievalStats> stats;  // present when the strategy computed them
    std::optional<Decision> decision;     // empty when the claim terminally failed
    std::string error;                    // failure description when decision is empty
    StageCounters counters;               // this claim's contribution
};

struct PipelineResult {
    std::vector<ClaimOutcome> outcomes;  // claim-id order
    RunManifest manifest;
    int exit_code = 0;  // 0 clean, 1 per-claim errors occurred
};

// Intermediate artifacts shared by the staged subcommands and run_claim.
struct ClaimArtifacts {
    ExtractionResult extraction;
    ContextPool pool;
    std::vector<std::vector<double>> snippet_embeddings;  // aligned with pool.snippets
    std::vector<ScoredSnippet> scored;
    StageCounters counters;
};

// Prompt templates and the credibility rule table, loaded from assets_dir.
struct Assets {
    PromptTemplate extraction_template;
    PromptTemplate decision_template;
    CredibilityTable credibility_rules;

    static Assets load(const std::string& assets_dir);
};

// Backend selection: REPLAY always gets the never-used NullBackend; LIVE and
// RECORD honor config.backend ("live" needs the documented API keys).
std::unique_ptr<Backend> make_backend(const RunConfig& config);

class Pipeline {
public:
    Pipeline(RunConfig config, std::unique_ptr<Backend> backend);

    // extract -> retrieve -> embed -> score, with the documented fallback
    // and drop paths. Throws only for claim-terminal faults.
    ClaimArtifacts gather(const Claim& claim, const ScoringConfig& scoring);

    // Full per-claim flow for one strategy. Never throws for per-claim
    // faults; failures are recorded on the outcome.
    ClaimOutcome run_claim(const Claim& claim, Strategy strategy, const ScoringConfig& scoring);

    // Concurrent run over a corpus at the configured strategy / alpha / k.
    PipelineResult run(const std::vector<Claim>& claims);
    PipelineResult run(const std::vector<Claim>& claims, Strategy strategy, double alpha, int k);

    Gateway& gateway() { return *gateway_; }
    const Assets& assets() const { return assets_; }
    const RunConfig& config() const { return config_; }

    // Per-claim RAND_K seed, derived from the single run seed.
    std::uint64_t claim_seed(const std::string& claim_id) const;

private:
    RunConfig config_;
    Assets assets_;
    std::unique_ptr<Gateway> gateway_;
};

// Loads the corpus named by the config (with the format's label map from
// assets_dir when needed).
std::vector<Claim> load_corpus(const RunConfig& config);

// Ingest + run + write decisions and manifest into out_dir. Returns the
// pipeline result; configuration errors throw before any work.
PipelineResult run_pipeline(const RunConfig& config);

// One serialized Decision per line, claim-id order.
void write_decisions_file(const std::string& path, const std::vector<ClaimOutcome>& outcomes);

}  // namespace rave
