#include "rave/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
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

double f1_from_precision_recall(double precision, double recall) {
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

// ---------------------------------------------------------------------------
// Ingestion

std::string to_string(CorpusFormat format) {
    switch (format) {
        case CorpusFormat::Canonical: return "canonical";
        case CorpusFormat::Ct22Tsv: return "ct22-tsv";
        case CorpusFormat::Policlaim: return "policlaim";
    }
    return "canonical";
}

std::optional<CorpusFormat> corpus_format_from_string(std::string_view s) {
    if (s == "canonical") return CorpusFormat::Canonical;
    if (s == "ct22-tsv") return CorpusFormat::Ct22Tsv;
    if (s == "policlaim") return CorpusFormat::Policlaim;
    return std::nullopt;
}

LabelMap LabelMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open label map: " + path);
    json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
        throw ConfigError("label map is not a JSON object: " + path);
    }
    LabelMap map;
    for (const auto& [token, value] : j.items()) {
        if (!value.is_string()) throw ConfigError("label map values must be strings: " + path);
        auto label = label_from_string(value.get<std::string>());
        if (!label) {
            throw ConfigError("label map value '" + value.get<std::string>() +
                              "' is not a verifiability label: " + path);
        }
        map.tokens[to_lower_ascii(trim(token))] = *label;
    }
    if (map.tokens.empty()) throw ConfigError("label map is empty: " + path);
    return map;
}

std::optional<VerifiabilityLabel> LabelMap::map(const std::string& token) const {
    auto it = tokens.find(to_lower_ascii(trim(token)));
    if (it == tokens.end()) return std::nullopt;
    return it->second;
}

namespace {

// RFC-4180-ish row reader handling quoted fields; `sep` is '\t' or ','.
std::vector<std::string> parse_delimited_row(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string current;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"' && current.empty()) {
            in_quotes = true;
        } else if (c == sep) {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

int find_column(const std::vector<std::string>& header,
                const std::vector<std::string>& candidates) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string name = to_lower_ascii(trim(header[i]));
        for (const std::string& candidate : candidates) {
            if (name == candidate) return static_cast<int>(i);
        }
    }
    return -1;
}

std::vector<Claim> ingest_delimited(const std::string& path, char sep, const LabelMap& label_map,
                                    const std::string& source_tag) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open corpus file: " + path);

    std::string line;
    if (!std::getline(in, line)) {
        log::warn("corpus file is empty: " + path);
        return {};
    }
    // Strip a UTF-8 BOM if present.
    if (line.size() >= 3 && line.rfind("\xEF\xBB\xBF", 0) == 0) line = line.substr(3);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = parse_delimited_row(line, sep);
    int id_col = find_column(header, {"id", "tweet_id", "sentence_id", "claim_id"});
    int text_col = find_column(header, {"text", "tweet_text", "sentence", "claim"});
    int label_col = find_column(header, {"label", "class_label", "check_worthiness", "golden",
                                         "gold_label", "verifiable"});
    if (text_col < 0 || label_col < 0) {
        throw IngestError(path + ": header must name a text column and a label column");
    }

    std::vector<Claim> claims;
    std::vector<std::string> bad_label_lines;
    std::set<std::string> seen_ids;
    std::vector<std::string> duplicate_ids;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto fields = parse_delimited_row(line, sep);
        auto field_at = [&](int col) {
            return (col >= 0 && col < static_cast<int>(fields.size())) ? fields[col]
                                                                       : std::string();
        };

        Claim claim;
        claim.id = trim(field_at(id_col));
        if (claim.id.empty()) claim.id = source_tag + "-" + std::to_string(line_no);
        claim.text = trim(field_at(text_col));
        claim.source_dataset = source_tag;

        std::string token = field_at(label_col);
        auto label = label_map.map(token);
        if (!label) {
            bad_label_lines.push_back(std::to_string(line_no) + " ('" + token + "')");
            continue;
        }
        claim.gold_label = *label;
        validate(claim);
        if (!seen_ids.insert(claim.id).second) duplicate_ids.push_back(claim.id);
        claims.push_back(std::move(claim));
    }

    if (!bad_label_lines.empty()) {
        std::string joined;
        for (const std::string& l : bad_label_lines) joined += (joined.empty() ? "" : ", ") + l;
        throw IngestError(path + ": unknown label token on line(s) " + joined);
    }
    if (!duplicate_ids.empty()) {
        throw IngestError(path + ": duplicate claim id(s): " + duplicate_ids.front());
    }
    if (claims.empty()) log::warn("corpus file has no data rows: " + path);
    return claims;
}

}  // namespace

std::vector<Claim> ingest_corpus(const std::string& path, CorpusFormat format,
                                 const LabelMap* label_map) {
    if (format == CorpusFormat::Canonical) {
        std::vector<Claim> claims;
        std::set<std::string> seen_ids;
        for (Record& record : read_records(path)) {
            if (!std::holds_alternative<Claim>(record)) {
                throw IngestError(path + ": canonical corpus may contain only claim records");
            }
            Claim claim = std::get<Claim>(std::move(record));
            if (!seen_ids.insert(claim.id).second) {
                throw IngestError(path + ": duplicate claim id: " + claim.id);
            }
            claims.push_back(std::move(claim));
        }
        if (claims.empty()) log::warn("corpus file has no records: " + path);
        return claims;
    }
    if (label_map == nullptr) {
        throw ConfigError("corpus format " + to_string(format) + " requires a label map");
    }
    char sep = (format == CorpusFormat::Ct22Tsv) ? '\t' : ',';
    std::string tag = (format == CorpusFormat::Ct22Tsv) ? "ct22" : "policlaim";
    return ingest_delimited(path, sep, *label_map, tag);
}

// ---------------------------------------------------------------------------
// Metrics

EvalReport compute_metrics(const std::vector<Decision>& decisions,
                           const std::map<std::string, VerifiabilityLabel>& golds,
                           int unparseable_count) {
    if (decisions.empty() && unparseable_count == 0) {
        throw EvalError("compute_metrics requires at least one decision");
    }

    EvalReport report;
    report.unparseable_count = unparseable_count;
    for (const Decision& decision : decisions) {
        auto it = golds.find(decision.claim_id);
        if (it == golds.end()) {
            throw EvalError("no gold label for claim " + decision.claim_id);
        }
        bool predicted_positive = decision.label == VerifiabilityLabel::Verifiable;
        bool actually_positive = it->second == VerifiabilityLabel::Verifiable;
        if (predicted_positive && actually_positive) ++report.counts.tp;
        if (predicted_positive && !actually_positive) ++report.counts.fp;
        if (!predicted_positive && !actually_positive) ++report.counts.tn;
        if (!predicted_positive && actually_positive) ++report.counts.fn;
    }

    const ConfusionCounts& c = report.counts;
    if (c.total() > 0) {
        report.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    }
    if (c.tp + c.fp > 0) {
        report.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    }
    if (c.tp + c.fn > 0) {
        report.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    }
    if (report.precision && report.recall) {
        report.f1 = f1_from_precision_recall(*report.precision, *report.recall);
    } else {
        report.f1 = 0.0;  // undefined precision or recall never inflates F1
    }
    return report;
}

// ---------------------------------------------------------------------------
// Alpha tuning

namespace {

enum class Outcome { Tp, Fp, Tn, Fn };

double f1_of_outcomes(const std::vector<Outcome>& outcomes) {
    long long tp = 0, fp = 0, fn = 0;
    for (Outcome o : outcomes) {
        if (o == Outcome::Tp) ++tp;
        if (o == Outcome::Fp) ++fp;
        if (o == Outcome::Fn) ++fn;
    }
    if (tp + fp == 0 || tp + fn == 0) return 0.0;
    double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
    double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return f1_from_precision_recall(p, r);
}

std::uint64_t bounded_draw64(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t raw;
    do {
        raw = rng();
    } while (raw >= limit);
    return raw % bound;
}

}  // namespace

AlphaTuneResult tune_alpha(const std::vector<Claim>& dev_claims, const AlphaTuneConfig& config,
                           const AlphaDecideFn& decide_fn) {
    if (config.grid.empty()) throw ConfigError("alpha grid must be non-empty");
    if (config.bootstrap_resamples < 1) {
        throw ConfigError("bootstrap_resamples must be >= 1");
    }
    for (const Claim& claim : dev_claims) {
        if (!claim.gold_label) {
            throw ConfigError("alpha tuning requires gold labels; claim " + claim.id +
                              " has none");
        }
    }
    if (dev_claims.empty()) throw ConfigError("alpha tuning requires a non-empty dev corpus");

    AlphaTuneResult result;
    for (std::size_t gi = 0; gi < config.grid.size(); ++gi) {
        double alpha = config.grid[gi];

        std::vector<Outcome> outcomes;
        outcomes.reserve(dev_claims.size());
        for (const Claim& claim : dev_claims) {
            auto predicted = decide_fn(claim, alpha);
            if (!predicted) continue;  // unparseable: excluded, as in compute_metrics
            bool pred_pos = *predicted == VerifiabilityLabel::Verifiable;
            bool gold_pos = *claim.gold_label == VerifiabilityLabel::Verifiable;
            if (pred_pos && gold_pos) outcomes.push_back(Outcome::Tp);
            if (pred_pos && !gold_pos) outcomes.push_back(Outcome::Fp);
            if (!pred_pos && !gold_pos) outcomes.push_back(Outcome::Tn);
            if (!pred_pos && gold_pos) outcomes.push_back(Outcome::Fn);
        }
        if (outcomes.empty()) {
            throw EvalError("every dev claim was unparseable at alpha " + std::to_string(alpha));
        }

        AlphaPoint point;
        point.alpha = alpha;
        point.mean_f1 = f1_of_outcomes(outcomes);

        // Bootstrap SE, seeded per grid point so adding grid points never
        // perturbs the others.
        std::mt19937_64 rng(config.seed ^ fnv1a64("alpha:" + std::to_string(gi)));
        double sum = 0.0, sum_sq = 0.0;
        std::vector<Outcome> resample(outcomes.size());
        for (int b = 0; b < config.bootstrap_resamples; ++b) {
            for (std::size_t i = 0; i < outcomes.size(); ++i) {
                resample[i] = outcomes[bounded_draw64(rng, outcomes.size())];
            }
            double f1 = f1_of_outcomes(resample);
            sum += f1;
            sum_sq += f1 * f1;
        }
        double n = config.bootstrap_resamples;
        double mean = sum / n;
        double variance = std::max(0.0, sum_sq / n - mean * mean);
        point.std_error = std::sqrt(variance);
        result.points.push_back(point);
    }

    // Best mean F1; exact ties resolve to 0.6 when it is among the best.
    const AlphaPoint* best = &result.points.front();
    for (const AlphaPoint& p : result.points) {
        if (p.mean_f1 > best->mean_f1) best = &p;
    }
    for (const AlphaPoint& p : result.points) {
        if (p.mean_f1 == best->mean_f1 && p.alpha == 0.6) best = &p;
    }

    // One-standard-error rule: candidates within one SE of the best.
    double threshold = best->mean_f1 - best->std_error;
    std::optional<double> chosen;
    for (const AlphaPoint& p : result.points) {
        if (p.mean_f1 < threshold) continue;
        if (!chosen) {
            chosen = p.alpha;
        } else if (config.prefer == OneSePrefer::Smaller) {
            chosen = std::min(*chosen, p.alpha);
        } else {
            chosen = std::max(*chosen, p.alpha);
        }
    }
    result.chosen_alpha = chosen.value_or(best->alpha);
    return result;
}

// ---------------------------------------------------------------------------
// K sweep

std::vector<KSweepRow> sweep_k(const std::vector<int>& k_values, const EvaluateAtKFn& evaluate) {
    if (k_values.empty()) throw ConfigError("k sweep requires at least one k value");
    std::vector<KSweepRow> rows;
    for (int k : k_values) {
        try {
            rows.push_back(KSweepRow{k, evaluate(k)});
        } catch (const Error& e) {
            log::error("k=" + std::to_string(k) + " failed: " + e.what() +
                       "; continuing with remaining k values");
        }
    }
    return rows;
}

namespace {
std::string metric_cell(const std::optional<double>& value) {
    if (!value) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *value);
    return buf;
}
}  // namespace

void write_sweep_csv(const std::string& path, const std::vector<KSweepRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write sweep csv: " + path);
    out << "k,accuracy,precision,recall,f1\n";
    for (const KSweepRow& row : rows) {
        out << row.k << ',' << metric_cell(row.report.accuracy) << ','
            << metric_cell(row.report.precision) << ',' << metric_cell(row.report.recall) << ','
            << metric_cell(row.report.f1) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Corpus statistics

std::vector<EntitySparsityRow> corpus_stats(const std::vector<Claim>& claims,
                                            const std::vector<ExtractionResult>& extractions) {
    std::map<std::string, const ExtractionResult*> by_id;
    for (const ExtractionResult& e : extractions) by_id[e.claim_id] = &e;

    EntitySparsityRow verifiable{VerifiabilityLabel::Verifiable, 0, 0, 0.0};
    EntitySparsityRow non_verifiable{VerifiabilityLabel::NonVerifiable, 0, 0, 0.0};
    EntitySparsityRow unlabeled{std::nullopt, 0, 0, 0.0};

    for (const Claim& claim : claims) {
        EntitySparsityRow* row = &unlabeled;
        if (claim.gold_label == VerifiabilityLabel::Verifiable) row = &verifiable;
        if (claim.gold_label == VerifiabilityLabel::NonVerifiable) row = &non_verifiable;
        ++row->claims;
        auto it = by_id.find(claim.id);
        bool zero = it == by_id.end() || it->second->entities.empty();
        if (zero) ++row->zero_entity;
    }

    std::vector<EntitySparsityRow> rows;
    for (EntitySparsityRow* row : {&verifiable, &non_verifiable, &unlabeled}) {
        if (row->claims == 0) continue;
        row->fraction = static_cast<double>(row->zero_entity) / row->claims;
        rows.push_back(*row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Misclassification export

int export_errors(const std::string& path, const std::vector<Decision>& decisions,
                  const std::map<std::string, VerifiabilityLabel>& golds,
                  const std::map<std::string, Claim>& claims_by_id,
                  const std::map<std::string, RetrievalStats>& stats_by_claim,
                  const std::string& decision_template_digest) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write error export: " + path);

    out << json{{"v", kRecordSchemaVersion},
                {"t", "errors_header"},
                {"decision_template_digest", decision_template_digest}}
               .dump()
        << '\n';

    int written = 0;
    for (const Decision& decision : decisions) {
        auto gold_it = golds.find(decision.claim_id);
        if (gold_it == golds.end()) {
            throw EvalError("no gold label for claim " + decision.claim_id);
        }
        bool predicted_positive = decision.label == VerifiabilityLabel::Verifiable;
        bool actually_positive = gold_it->second == VerifiabilityLabel::Verifiable;
        if (predicted_positive == actually_positive) continue;

        auto claim_it = claims_by_id.find(decision.claim_id);
        if (claim_it == claims_by_id.end()) {
            throw EvalError("no claim text for claim " + decision.claim_id);
        }

        json evidence = json::array();
        for (const ScoredSnippet& s : decision.evidence_used) {
            evidence.push_back(json::parse(serialize_record(Record{s})));
        }
        json record{{"v", kRecordSchemaVersion},
                    {"t", "error_record"},
                    {"error_type", predicted_positive ? "FP" : "FN"},
                    {"claim_id", decision.claim_id},
                    {"claim_text", claim_it->second.text},
                    {"strategy", to_string(decision.strategy)},
                    {"label", to_string(decision.label)},
                    {"gold", to_string(gold_it->second)},
                    {"raw_model_output", decision.raw_model_output},
                    {"prompt_hash", decision.prompt_hash},
                    {"decision_template_digest", decision_template_digest},
                    {"evidence", evidence}};
        auto stats_it = stats_by_claim.find(decision.claim_id);
        if (stats_it != stats_by_claim.end()) {
            record["stats"] = json::parse(serialize_record(Record{stats_it->second}));
        }
        out << record.dump() << '\n';
        ++written;
    }
    return written;
}

}  // namespace rave
