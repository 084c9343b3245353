#include "rave/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json_util.hpp"
#include "rave/digest.hpp"
#include "rave/log.hpp"
#include "rave/text.hpp"

namespace rave {

using jsonu::json;

// ---------------------------------------------------------------------------
// Counters and manifest

void StageCounters::merge(const StageCounters& other) {
    claims += other.claims;
    claims_failed += other.claims_failed;
    entities += other.entities;
    entities_unknown_kind_dropped += other.entities_unknown_kind_dropped;
    entities_hallucinated_dropped += other.entities_hallucinated_dropped;
    extraction_failures += other.extraction_failures;
    snippets += other.snippets;
    snippets_dropped_embedding += other.snippets_dropped_embedding;
    search_failures += other.search_failures;
    decisions += other.decisions;
    unparseable_decisions += other.unparseable_decisions;
    llm_repairs += other.llm_repairs;
}

namespace {

json counters_to_json(const StageCounters& c) {
    return json{{"claims", c.claims},
                {"claims_failed", c.claims_failed},
                {"entities", c.entities},
                {"entities_unknown_kind_dropped", c.entities_unknown_kind_dropped},
                {"entities_hallucinated_dropped", c.entities_hallucinated_dropped},
                {"extraction_failures", c.extraction_failures},
                {"snippets", c.snippets},
                {"snippets_dropped_embedding", c.snippets_dropped_embedding},
                {"search_failures", c.search_failures},
                {"decisions", c.decisions},
                {"unparseable_decisions", c.unparseable_decisions},
                {"llm_repairs", c.llm_repairs}};
}

StageCounters counters_from_json(const json& j) {
    StageCounters c;
    c.claims = j.value("claims", 0);
    c.claims_failed = j.value("claims_failed", 0);
    c.entities = j.value("entities", 0);
    c.entities_unknown_kind_dropped = j.value("entities_unknown_kind_dropped", 0);
    c.entities_hallucinated_dropped = j.value("entities_hallucinated_dropped", 0);
    c.extraction_failures = j.value("extraction_failures", 0);
    c.snippets = j.value("snippets", 0);
    c.snippets_dropped_embedding = j.value("snippets_dropped_embedding", 0);
    c.search_failures = j.value("search_failures", 0);
    c.decisions = j.value("decisions", 0);
    c.unparseable_decisions = j.value("unparseable_decisions", 0);
    c.llm_repairs = j.value("llm_repairs", 0);
    return c;
}

}  // namespace

std::string RunManifest::to_json() const {
    json j{{"v", kRecordSchemaVersion},
           {"config", config},
           {"extraction_template_digest", extraction_template_digest},
           {"decision_template_digest", decision_template_digest},
           {"credibility_rules_digest", credibility_rules_digest},
           {"cache_digest", cache_digest},
           {"backend", backend_name},
           {"started_at", started_at},
           {"finished_at", finished_at},
           {"counters", counters_to_json(counters)},
           {"claim_errors", claim_errors}};
    return j.dump(2);
}

RunManifest RunManifest::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
        throw RecordParseError("manifest is not a JSON object");
    }
    RunManifest m;
    for (const auto& [key, value] : jsonu::require_object(j, "config").items()) {
        m.config[key] = value.get<std::string>();
    }
    m.extraction_template_digest = jsonu::require_string(j, "extraction_template_digest");
    m.decision_template_digest = jsonu::require_string(j, "decision_template_digest");
    m.credibility_rules_digest = jsonu::require_string(j, "credibility_rules_digest");
    m.cache_digest = jsonu::require_string(j, "cache_digest");
    m.backend_name = jsonu::require_string(j, "backend");
    m.started_at = jsonu::require_string(j, "started_at");
    m.finished_at = jsonu::require_string(j, "finished_at");
    m.counters = counters_from_json(jsonu::require_object(j, "counters"));
    for (const json& e : jsonu::require_array(j, "claim_errors")) {
        m.claim_errors.push_back(e.get<std::string>());
    }
    return m;
}

// ---------------------------------------------------------------------------
// Assets and backends

Assets Assets::load(const std::string& assets_dir) {
    Assets assets;
    assets.extraction_template = PromptTemplate::load(assets_dir + "/prompts/extraction_v1.txt");
    assets.decision_template = PromptTemplate::load(assets_dir + "/prompts/decision_v1.txt");
    assets.credibility_rules = CredibilityTable::load(assets_dir + "/credibility_rules_v1.txt");
    return assets;
}

std::unique_ptr<Backend> make_backend(const RunConfig& config) {
    if (config.mode == GatewayMode::Replay) return std::make_unique<NullBackend>();
    if (config.backend == "simulated") return std::make_unique<SimulatedBackend>();
    LiveEndpoints endpoints;
    endpoints.llm_base_url = config.llm_base_url;
    endpoints.embed_base_url = config.embed_base_url;
    endpoints.search_base_url = config.search_base_url;
    return LiveBackend::from_env(std::move(endpoints));
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

GatewayConfig gateway_config_of(const RunConfig& config) {
    GatewayConfig g;
    g.mode = config.mode;
    g.cache_dir = config.cache_dir;
    g.model_id = config.model_id;
    g.embed_model_id = config.embed_model_id;
    g.temperature = config.temperature;
    g.top_p = config.top_p;
    g.max_tokens = config.max_tokens;
    g.results_per_query = config.results_per_query;
    g.retries = config.retries;
    g.retry_backoff_seconds = config.retry_backoff_seconds;
    return g;
}

}  // namespace

Pipeline::Pipeline(RunConfig config, std::unique_ptr<Backend> backend)
    : config_(std::move(config)),
      assets_(Assets::load(config_.assets_dir)),
      gateway_(std::make_unique<Gateway>(gateway_config_of(config_), std::move(backend))) {}

std::uint64_t Pipeline::claim_seed(const std::string& claim_id) const {
    return config_.seed ^ fnv1a64("randk:" + claim_id);
}

ClaimArtifacts Pipeline::gather(const Claim& claim, const ScoringConfig& scoring) {
    ClaimArtifacts art;

    ExtractionDrops drops;
    try {
        art.extraction = extract_entities(*gateway_, assets_.extraction_template, claim, &drops);
    } catch (const ExtractionFormatError& e) {
        // Treated as a zero-entity claim; the failure is logged and counted.
        log::warn("extraction failed for claim " + claim.id + ": " + e.what());
        art.extraction.claim_id = claim.id;
        art.extraction.raw_model_output = e.raw_output();
        art.extraction.prompt_digest = assets_.extraction_template.digest;
        ++art.counters.extraction_failures;
    }
    art.counters.entities += static_cast<int>(art.extraction.entities.size());
    art.counters.entities_unknown_kind_dropped += drops.unknown_kind;
    art.counters.entities_hallucinated_dropped += drops.hallucinated;
    art.counters.llm_repairs += drops.repairs;

    std::vector<Entity> query_entities = art.extraction.entities;
    if (query_entities.empty() && config_.claim_fallback_search) {
        query_entities.push_back(Entity{claim.text, EntityKind::ClaimObject});
    }

    art.pool = build_pool(*gateway_, claim, query_entities);
    for (const PerEntityCount& row : art.pool.per_entity_counts) {
        if (row.failed) ++art.counters.search_failures;
    }
    art.counters.snippets += static_cast<int>(art.pool.snippets.size());

    if (!art.pool.snippets.empty()) {
        std::vector<std::string> texts;
        texts.reserve(art.pool.snippets.size() + 1);
        texts.push_back(claim.text);
        for (const Snippet& s : art.pool.snippets) texts.push_back(s.text);
        auto embeddings = gateway_->embed(texts);
        art.snippet_embeddings.assign(embeddings.begin() + 1, embeddings.end());

        ScoringDrops score_drops;
        art.scored = score_from_embeddings(art.pool, embeddings.front(), art.snippet_embeddings,
                                           assets_.credibility_rules, scoring, &score_drops);
        art.counters.snippets_dropped_embedding += score_drops.embedding_failures;
    }
    return art;
}

ClaimOutcome Pipeline::run_claim(const Claim& claim, Strategy strategy,
                                 const ScoringConfig& scoring) {
    ClaimOutcome outcome;
    outcome.claim_id = claim.id;
    outcome.counters.claims = 1;

    DecisionDrops drops;
    try {
        StrategyInput input;
        if (strategy == Strategy::TextOnly) {
            // No retrieval stages at all; the snippet counter stays 0.
            input = assemble_evidence(strategy, claim, ContextPool{claim.id, {}, {}}, {}, scoring,
                                      std::nullopt);
        } else {
            ClaimArtifacts art = gather(claim, scoring);
            outcome.extraction = art.extraction;
            outcome.counters.merge(art.counters);

            std::optional<RetrievalStats> stats;
            if (strategy == Strategy::RaveStats) {
                stats = compute_stats(art.extraction.entities, art.pool, art.snippet_embeddings,
                                      config_.results_per_query);
                outcome.stats = stats;
            }
            std::optional<std::uint64_t> seed;
            if (strategy == Strategy::RandK) seed = claim_seed(claim.id);
            input = assemble_evidence(strategy, claim, art.pool, art.scored, scoring, seed, stats);
        }

        Decision decision = decide(*gateway_, assets_.decision_template, input, &drops);
        outcome.counters.decisions += 1;
        outcome.decision = std::move(decision);
    } catch (const DecisionFormatError& e) {
        outcome.error = e.what();
        outcome.counters.unparseable_decisions += 1;
        outcome.counters.claims_failed += 1;
        log::error("claim " + claim.id + ": " + e.what());
    } catch (const ConfigError&) {
        throw;  // configuration problems abort the run
    } catch (const Error& e) {
        outcome.error = e.what();
        outcome.counters.claims_failed += 1;
        log::error("claim " + claim.id + ": " + e.what());
    }
    // Repairs count whether or not the decision ultimately parsed.
    outcome.counters.llm_repairs += drops.repairs;
    return outcome;
}

PipelineResult Pipeline::run(const std::vector<Claim>& claims) {
    return run(claims, config_.strategy, config_.alpha, config_.k);
}

PipelineResult Pipeline::run(const std::vector<Claim>& claims, Strategy strategy, double alpha,
                             int k) {
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must be in [0, 1]");
    if (k < 1) throw ConfigError("k must be >= 1");
    ScoringConfig scoring{alpha, k};

    PipelineResult result;
    result.manifest.started_at = utc_timestamp();

    // Claim-id order fixes both the processing layout and the output order.
    std::vector<Claim> ordered = claims;
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const Claim& a, const Claim& b) { return a.id < b.id; });

    result.outcomes.resize(ordered.size());
    int worker_count = config_.workers > 0
                           ? config_.workers
                           : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (!ordered.empty()) worker_count = std::min(worker_count, static_cast<int>(ordered.size()));

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= ordered.size()) return;
            result.outcomes[i] = run_claim(ordered[i], strategy, scoring);
        }
    };
    if (worker_count <= 1) {
        work();
    } else {
        std::vector<std::thread> workers;
        workers.reserve(worker_count);
        for (int w = 0; w < worker_count; ++w) workers.emplace_back(work);
        for (std::thread& t : workers) t.join();
    }

    for (const ClaimOutcome& outcome : result.outcomes) {
        result.manifest.counters.merge(outcome.counters);
        if (!outcome.error.empty()) {
            result.manifest.claim_errors.push_back(outcome.claim_id + ": " + outcome.error);
        }
    }
    result.manifest.finished_at = utc_timestamp();
    result.manifest.config = config_snapshot(config_);
    result.manifest.config["strategy"] = to_string(strategy);
    result.manifest.config["alpha"] = std::to_string(alpha);
    result.manifest.config["k"] = std::to_string(k);
    result.manifest.extraction_template_digest = assets_.extraction_template.digest;
    result.manifest.decision_template_digest = assets_.decision_template.digest;
    result.manifest.credibility_rules_digest = assets_.credibility_rules.digest();
    result.manifest.cache_digest = gateway_->cache().digest();
    result.manifest.backend_name = config_.mode == GatewayMode::Replay ? "replay" : config_.backend;
    result.exit_code = result.manifest.counters.claims_failed > 0 ? 1 : 0;
    return result;
}

// ---------------------------------------------------------------------------
// Top-level entry points

std::vector<Claim> load_corpus(const RunConfig& config) {
    if (config.corpus_path.empty()) throw ConfigError("no corpus path configured");
    if (config.corpus_format == CorpusFormat::Canonical) {
        return ingest_corpus(config.corpus_path, config.corpus_format);
    }
    std::string map_name = config.corpus_format == CorpusFormat::Ct22Tsv ? "ct22" : "policlaim";
    LabelMap map = LabelMap::load(config.assets_dir + "/label_maps/" + map_name + ".json");
    return ingest_corpus(config.corpus_path, config.corpus_format, &map);
}

void write_decisions_file(const std::string& path, const std::vector<ClaimOutcome>& outcomes) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write decisions file: " + path);
    for (const ClaimOutcome& outcome : outcomes) {
        if (outcome.decision) out << serialize_record(Record{*outcome.decision}) << '\n';
    }
}

PipelineResult run_pipeline(const RunConfig& config) {
    std::vector<Claim> claims = load_corpus(config);
    Pipeline pipeline(config, make_backend(config));
    PipelineResult result = pipeline.run(claims);

    std::filesystem::create_directories(config.out_dir);
    write_decisions_file(config.out_dir + "/decisions_" + to_string(config.strategy) + ".jsonl",
                         result.outcomes);
    std::ofstream manifest(config.out_dir + "/manifest.json", std::ios::trunc);
    if (!manifest) throw ConfigError("cannot write manifest: " + config.out_dir);
    manifest << result.manifest.to_json() << '\n';
    return result;
}

}  // namespace rave
