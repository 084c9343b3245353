// rave: retrieval- and scoring-aware verifiable claim detection pipeline.
//
// One binary, composable subcommands: every pipeline stage is independently
// runnable for audit. Exit codes: 0 clean, 1 per-claim errors occurred,
// 2 configuration error / abort.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rave/config.hpp"
#include "rave/digest.hpp"
#include "rave/evaluation.hpp"
#include "rave/log.hpp"
#include "rave/pipeline.hpp"
#include "rave/text.hpp"

namespace {

using namespace rave;

constexpr int kExitClean = 0;
constexpr int kExitClaimErrors = 1;
constexpr int kExitConfig = 2;

struct CliState {
    std::map<std::string, std::string> flags;
    std::optional<std::string> config_file;
    bool verbose = false;
};

// Every config key becomes a --key-with-dashes option; values are validated
// centrally by load_config.
void register_config_flags(CLI::App* cmd, CliState& state) {
    cmd->add_option("--config", "config file (JSON, documented key set)")
        ->each([&state](const std::string& v) { state.config_file = v; });
    cmd->add_flag("--verbose", state.verbose, "enable debug logging");
    for (const std::string& key : config_keys()) {
        std::string flag = "--" + key;
        for (char& c : flag) {
            if (c == '_') c = '-';
        }
        cmd->add_option_function<std::string>(
            flag, [&state, key](const std::string& v) { state.flags[key] = v; },
            "config key " + key);
    }
}

RunConfig resolve_config(const CliState& state) {
    RunConfig config = load_config(state.flags, system_env(), state.config_file);
    if (state.verbose) log::set_threshold(log::Level::Debug);
    return config;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write manifest: " + path);
    out << manifest.to_json() << '\n';
}

std::map<std::string, VerifiabilityLabel> golds_of(const std::vector<Claim>& claims) {
    std::map<std::string, VerifiabilityLabel> golds;
    for (const Claim& claim : claims) {
        if (claim.gold_label) golds[claim.id] = *claim.gold_label;
    }
    return golds;
}

std::string metric_str(const std::optional<double>& v) {
    if (!v) return "   NA ";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *v);
    return buf;
}

void print_report_row(const EvalReport& report) {
    std::printf("%-10s  %s  %s  %s  %s  (tp=%lld fp=%lld tn=%lld fn=%lld unparseable=%d)\n",
                to_string(report.strategy).c_str(), metric_str(report.accuracy).c_str(),
                metric_str(report.precision).c_str(), metric_str(report.recall).c_str(),
                metric_str(report.f1).c_str(), report.counts.tp, report.counts.fp,
                report.counts.tn, report.counts.fn, report.unparseable_count);
}

EvalReport evaluate_outcomes(const PipelineResult& result,
                             const std::map<std::string, VerifiabilityLabel>& golds,
                             Strategy strategy, const RunConfig& config, double alpha, int k) {
    std::vector<Decision> decisions;
    int failed = 0;
    for (const ClaimOutcome& outcome : result.outcomes) {
        if (outcome.decision) {
            decisions.push_back(*outcome.decision);
        } else {
            ++failed;
        }
    }
    EvalReport report = compute_metrics(decisions, golds, failed);
    report.strategy = strategy;
    report.dataset = config.corpus_path;
    report.config_snapshot["alpha"] = std::to_string(alpha);
    report.config_snapshot["k"] = std::to_string(k);
    report.config_snapshot["model_id"] = config.model_id;
    report.config_snapshot["extraction_template_digest"] =
        result.manifest.extraction_template_digest;
    report.config_snapshot["decision_template_digest"] = result.manifest.decision_template_digest;
    report.config_snapshot["credibility_rules_digest"] = result.manifest.credibility_rules_digest;
    return report;
}

std::string report_json(const EvalReport& r) {
    std::string precision = r.precision ? std::to_string(*r.precision) : "null";
    std::string recall = r.recall ? std::to_string(*r.recall) : "null";
    std::string out = "{\"strategy\":\"" + to_string(r.strategy) + "\"";
    out += ",\"accuracy\":" + std::to_string(r.accuracy);
    out += ",\"precision\":" + precision;
    out += ",\"recall\":" + recall;
    out += ",\"f1\":" + std::to_string(r.f1);
    out += ",\"tp\":" + std::to_string(r.counts.tp) + ",\"fp\":" + std::to_string(r.counts.fp);
    out += ",\"tn\":" + std::to_string(r.counts.tn) + ",\"fn\":" + std::to_string(r.counts.fn);
    out += ",\"unparseable\":" + std::to_string(r.unparseable_count) + "}";
    return out;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_extract(const RunConfig& config) {
    std::vector<Claim> claims = load_corpus(config);
    Pipeline pipeline(config, make_backend(config));

    std::filesystem::create_directories(config.out_dir);
    std::ofstream out(config.out_dir + "/extraction.jsonl", std::ios::trunc);
    RunManifest manifest;
    manifest.started_at = utc_timestamp();

    int failed = 0;
    for (const Claim& claim : claims) {
        StageCounters counters;
        counters.claims = 1;
        ExtractionDrops drops;
        try {
            ExtractionResult result =
                extract_entities(pipeline.gateway(), pipeline.assets().extraction_template, claim,
                                 &drops);
            counters.entities = static_cast<int>(result.entities.size());
            out << serialize_record(Record{result}) << '\n';
        } catch (const ExtractionFormatError& e) {
            ++failed;
            counters.extraction_failures = 1;
            counters.claims_failed = 1;
            manifest.claim_errors.push_back(claim.id + ": " + e.what());
            log::error("claim " + claim.id + ": " + e.what());
        }
        counters.entities_unknown_kind_dropped = drops.unknown_kind;
        counters.entities_hallucinated_dropped = drops.hallucinated;
        counters.llm_repairs = drops.repairs;
        manifest.counters.merge(counters);
    }
    manifest.finished_at = utc_timestamp();
    manifest.config = config_snapshot(config);
    manifest.extraction_template_digest = pipeline.assets().extraction_template.digest;
    manifest.decision_template_digest = pipeline.assets().decision_template.digest;
    manifest.credibility_rules_digest = pipeline.assets().credibility_rules.digest();
    manifest.cache_digest = pipeline.gateway().cache().digest();
    write_manifest(config.out_dir + "/manifest.json", manifest);
    std::printf("extracted entities for %d claims (%d failed) -> %s/extraction.jsonl\n",
                manifest.counters.claims, failed, config.out_dir.c_str());
    return failed > 0 ? kExitClaimErrors : kExitClean;
}

int cmd_retrieve(const RunConfig& config) {
    std::vector<Claim> claims = load_corpus(config);
    Pipeline pipeline(config, make_backend(config));
    ScoringConfig scoring{config.alpha, config.k};

    std::filesystem::create_directories(config.out_dir);
    std::ofstream out(config.out_dir + "/pools.jsonl", std::ios::trunc);
    RunManifest manifest;
    manifest.started_at = utc_timestamp();
    int failed = 0;
    for (const Claim& claim : claims) {
        try {
            ClaimArtifacts art = pipeline.gather(claim, scoring);
            manifest.counters.merge(art.counters);
            manifest.counters.claims += 1;
            out << serialize_pool(art.pool) << '\n';
        } catch (const Error& e) {
            ++failed;
            manifest.counters.claims += 1;
            manifest.counters.claims_failed += 1;
            manifest.claim_errors.push_back(claim.id + ": " + e.what());
            log::error("claim " + claim.id + ": " + e.what());
        }
    }
    manifest.finished_at = utc_timestamp();
    manifest.config = config_snapshot(config);
    manifest.cache_digest = pipeline.gateway().cache().digest();
    write_manifest(config.out_dir + "/manifest.json", manifest);
    std::printf("retrieved %d snippets over %d claims -> %s/pools.jsonl\n",
                manifest.counters.snippets, manifest.counters.claims, config.out_dir.c_str());
    return failed > 0 ? kExitClaimErrors : kExitClean;
}

int cmd_score(const RunConfig& config) {
    std::vector<Claim> claims = load_corpus(config);
    Pipeline pipeline(config, make_backend(config));
    ScoringConfig scoring{config.alpha, config.k};

    std::filesystem::create_directories(config.out_dir);
    std::ofstream out(config.out_dir + "/scores.csv", std::ios::trunc);
    out << "claim_id,url,relevance,credibility,combined\n";
    int failed = 0;
    for (const Claim& claim : claims) {
        try {
            ClaimArtifacts art = pipeline.gather(claim, scoring);
            for (const ScoredSnippet& s : art.scored) {
                out << claim.id << ",\"" << s.snippet.url << "\",";
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.6f,%.2f,%.6f", s.relevance, s.credibility,
                              s.combined);
                out << buf << '\n';
            }
        } catch (const Error& e) {
            ++failed;
            log::error("claim " + claim.id + ": " + e.what());
        }
    }
    std::printf("scored pools for %zu claims -> %s/scores.csv\n", claims.size(),
                config.out_dir.c_str());
    return failed > 0 ? kExitClaimErrors : kExitClean;
}

int cmd_detect(const RunConfig& config) {
    PipelineResult result = run_pipeline(config);
    std::printf("decisions: %d ok, %d failed -> %s/decisions_%s.jsonl\n",
                result.manifest.counters.decisions, result.manifest.counters.claims_failed,
                config.out_dir.c_str(), to_string(config.strategy).c_str());
    return result.exit_code;
}

int cmd_evaluate(const RunConfig& config, const std::string& strategies_arg) {
    std::vector<Strategy> strategies;
    if (strategies_arg == "all") {
        strategies.assign(kAllStrategies.begin(), kAllStrategies.end());
    } else {
        for (const std::string& name : split(strategies_arg, ',')) {
            auto s = strategy_from_string(trim(name));
            if (!s) throw ConfigError("unknown strategy '" + name + "'");
            strategies.push_back(*s);
        }
    }

    std::vector<Claim> claims = load_corpus(config);
    auto golds = golds_of(claims);
    Pipeline pipeline(config, make_backend(config));

    std::filesystem::create_directories(config.out_dir);
    std::ofstream report_out(config.out_dir + "/eval_report.jsonl", std::ios::trunc);
    std::printf("%-10s  %-6s  %-6s  %-6s  %-6s\n", "strategy", "acc", "prec", "rec", "f1");
    int exit_code = kExitClean;
    for (Strategy strategy : strategies) {
        PipelineResult result = pipeline.run(claims, strategy, config.alpha, config.k);
        if (result.exit_code != 0) exit_code = kExitClaimErrors;
        EvalReport report =
            evaluate_outcomes(result, golds, strategy, config, config.alpha, config.k);
        print_report_row(report);
        report_out << report_json(report) << '\n';
        write_decisions_file(
            config.out_dir + "/decisions_" + to_string(strategy) + ".jsonl", result.outcomes);
        write_manifest(config.out_dir + "/manifest_" + to_string(strategy) + ".json",
                       result.manifest);
    }
    std::printf("reports -> %s/eval_report.jsonl\n", config.out_dir.c_str());
    return exit_code;
}

int cmd_tune_alpha(const RunConfig& config) {
    std::vector<Claim> claims = load_corpus(config);
    Pipeline pipeline(config, make_backend(config));

    // One concurrent pipeline run per grid point, then the tuner consumes a
    // lookup table of predicted labels.
    std::map<double, std::map<std::string, std::optional<VerifiabilityLabel>>> predictions;
    for (double alpha : config.alpha_grid) {
        PipelineResult result = pipeline.run(claims, Strategy::Rave, alpha, config.k);
        auto& for_alpha = predictions[alpha];
        for (const ClaimOutcome& outcome : result.outcomes) {
            for_alpha[outcome.claim_id] =
                outcome.decision ? std::optional<VerifiabilityLabel>(outcome.decision->label)
                                 : std::nullopt;
        }
    }

    AlphaTuneConfig tune_config;
    tune_config.grid = config.alpha_grid;
    tune_config.bootstrap_resamples = config.bootstrap_resamples;
    tune_config.seed = config.seed;
    tune_config.prefer = config.one_se_prefer;
    AlphaTuneResult result = tune_alpha(claims, tune_config, [&](const Claim& claim, double alpha) {
        return predictions.at(alpha).at(claim.id);
    });

    std::filesystem::create_directories(config.out_dir);
    std::ofstream out(config.out_dir + "/alpha_tune.json", std::ios::trunc);
    out << "{\"points\":[";
    std::printf("%-6s  %-8s  %-8s\n", "alpha", "mean_f1", "std_err");
    for (std::size_t i = 0; i < result.points.size(); ++i) {
        const AlphaPoint& p = result.points[i];
        std::printf("%.2f    %.4f    %.4f\n", p.alpha, p.mean_f1, p.std_error);
        out << (i > 0 ? "," : "") << "{\"alpha\":" << p.alpha << ",\"mean_f1\":" << p.mean_f1
            << ",\"std_error\":" << p.std_error << "}";
    }
    out << "],\"chosen_alpha\":" << result.chosen_alpha << "}\n";
    std::printf("chosen alpha: %.2f -> %s/alpha_tune.json\n", result.chosen_alpha,
                config.out_dir.c_str());
    return kExitClean;
}

int cmd_sweep_k(const RunConfig& config) {
    std::vector<Claim> claims = load_corpus(config);
    auto golds = golds_of(claims);
    Pipeline pipeline(config, make_backend(config));

    auto rows = sweep_k(config.k_grid, [&](int k) {
        PipelineResult result = pipeline.run(claims, config.strategy, config.alpha, k);
        return evaluate_outcomes(result, golds, config.strategy, config, config.alpha, k);
    });

    std::filesystem::create_directories(config.out_dir);
    write_sweep_csv(config.out_dir + "/sweep_k.csv", rows);
    write_sweep_chart(config.out_dir + "/sweep_k.svg", rows);
    std::printf("%-4s  %-6s  %-6s  %-6s  %-6s\n", "k", "acc", "prec", "rec", "f1");
    for (const KSweepRow& row : rows) {
        std::printf("%-4d  %s  %s  %s  %s\n", row.k, metric_str(row.report.accuracy).c_str(),
                    metric_str(row.report.precision).c_str(),
                    metric_str(row.report.recall).c_str(), metric_str(row.report.f1).c_str());
    }
    std::printf("sweep -> %s/sweep_k.csv, %s/sweep_k.svg\n", config.out_dir.c_str(),
                config.out_dir.c_str());
    return kExitClean;
}

int cmd_stats(const RunConfig& config) {
    std::vector<Claim> claims = load_corpus(config);
    Pipeline pipeline(config, make_backend(config));

    std::vector<ExtractionResult> extractions;
    for (const Claim& claim : claims) {
        try {
            extractions.push_back(extract_entities(pipeline.gateway(),
                                                   pipeline.assets().extraction_template, claim));
        } catch (const ExtractionFormatError&) {
            extractions.push_back(ExtractionResult{claim.id, {}, "", ""});
        }
    }

    auto rows = corpus_stats(claims, extractions);
    std::filesystem::create_directories(config.out_dir);
    std::ofstream out(config.out_dir + "/entity_sparsity.csv", std::ios::trunc);
    out << "label,claims,zero_entity,fraction\n";
    std::printf("%-16s  %-7s  %-12s  %s\n", "label", "claims", "zero_entity", "fraction");
    for (const EntitySparsityRow& row : rows) {
        std::string label = row.label ? to_string(*row.label) : "(unlabeled)";
        out << label << ',' << row.claims << ',' << row.zero_entity << ',' << row.fraction << '\n';
        std::printf("%-16s  %-7d  %-12d  %.4f\n", label.c_str(), row.claims, row.zero_entity,
                    row.fraction);
    }
    std::printf("stats -> %s/entity_sparsity.csv\n", config.out_dir.c_str());
    return kExitClean;
}

int cmd_export_errors(const RunConfig& config) {
    std::vector<Claim> claims = load_corpus(config);
    auto golds = golds_of(claims);
    Pipeline pipeline(config, make_backend(config));
    PipelineResult result = pipeline.run(claims);

    std::vector<Decision> decisions;
    std::map<std::string, RetrievalStats> stats_by_claim;
    for (const ClaimOutcome& outcome : result.outcomes) {
        if (outcome.decision) decisions.push_back(*outcome.decision);
        if (outcome.stats) stats_by_claim[outcome.claim_id] = *outcome.stats;
    }
    std::map<std::string, Claim> claims_by_id;
    for (const Claim& claim : claims) claims_by_id[claim.id] = claim;

    std::filesystem::create_directories(config.out_dir);
    int written = export_errors(config.out_dir + "/errors.jsonl", decisions, golds, claims_by_id,
                                stats_by_claim, pipeline.assets().decision_template.digest);
    std::printf("exported %d misclassification record(s) -> %s/errors.jsonl\n", written,
                config.out_dir.c_str());
    return result.exit_code;
}

int cmd_record_fixtures(const RunConfig& config_in, const std::string& strategies_arg) {
    RunConfig config = config_in;
    if (config.mode != GatewayMode::Record) {
        throw ConfigError("record-fixtures requires --mode record");
    }
    std::vector<Claim> claims = load_corpus(config);
    Pipeline pipeline(config, make_backend(config));

    std::vector<Strategy> strategies;
    if (strategies_arg == "all") {
        strategies.assign(kAllStrategies.begin(), kAllStrategies.end());
    } else {
        for (const std::string& name : split(strategies_arg, ',')) {
            auto s = strategy_from_string(trim(name));
            if (!s) throw ConfigError("unknown strategy '" + name + "'");
            strategies.push_back(*s);
        }
    }

    // Cover the full request surface the replayable commands need: every
    // strategy at the configured (alpha, k), the K sweep, and the alpha grid.
    for (Strategy strategy : strategies) {
        pipeline.run(claims, strategy, config.alpha, config.k);
    }
    for (int k : config.k_grid) {
        pipeline.run(claims, Strategy::Rave, config.alpha, k);
    }
    for (double alpha : config.alpha_grid) {
        pipeline.run(claims, Strategy::Rave, alpha, config.k);
    }
    std::printf("fixture cache now holds %zu entries under %s\n", pipeline.gateway().cache().size(),
                config.cache_dir.c_str());
    return kExitClean;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"retrieval- and scoring-aware verifiable claim detection"};
    app.require_subcommand(1);

    CliState state;
    std::string strategies_arg = "all";

    CLI::App* extract = app.add_subcommand("extract", "extract entities per claim");
    CLI::App* retrieve = app.add_subcommand("retrieve", "build snippet context pools");
    CLI::App* score = app.add_subcommand("score", "dump relevance/credibility/combined scores");
    CLI::App* detect = app.add_subcommand("detect", "run the full pipeline, one decision per claim");
    CLI::App* evaluate = app.add_subcommand("evaluate", "score strategies against gold labels");
    CLI::App* tune_alpha_cmd = app.add_subcommand("tune-alpha", "grid search alpha on a dev corpus");
    CLI::App* sweep_k_cmd = app.add_subcommand("sweep-k", "evaluate across the K grid");
    CLI::App* stats = app.add_subcommand("stats", "entity-sparsity statistics per gold label");
    CLI::App* export_errors_cmd =
        app.add_subcommand("export-errors", "export FP/FN records for manual review");
    CLI::App* record_fixtures =
        app.add_subcommand("record-fixtures", "populate the request cache for later replay");

    for (CLI::App* cmd : {extract, retrieve, score, detect, evaluate, tune_alpha_cmd, sweep_k_cmd,
                          stats, export_errors_cmd, record_fixtures}) {
        register_config_flags(cmd, state);
    }
    evaluate->add_option("--strategies", strategies_arg,
                         "comma-separated strategy list or 'all'");
    record_fixtures->add_option("--strategies", strategies_arg,
                                "comma-separated strategy list or 'all'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        RunConfig config = resolve_config(state);
        if (extract->parsed()) return cmd_extract(config);
        if (retrieve->parsed()) return cmd_retrieve(config);
        if (score->parsed()) return cmd_score(config);
        if (detect->parsed()) return cmd_detect(config);
        if (evaluate->parsed()) return cmd_evaluate(config, strategies_arg);
        if (tune_alpha_cmd->parsed()) return cmd_tune_alpha(config);
        if (sweep_k_cmd->parsed()) return cmd_sweep_k(config);
        if (stats->parsed()) return cmd_stats(config);
        if (export_errors_cmd->parsed()) return cmd_export_errors(config);
        if (record_fixtures->parsed()) return cmd_record_fixtures(config, strategies_arg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitConfig;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitConfig;
}
