#pragma once
// Evaluation harness: corpus ingestion, confusion-matrix metrics, alpha
// grid search with the one-standard-error rule, K-sensitivity sweep,
// entity-sparsity statistics, and misclassification export.
//
// Positive class is VERIFIABLE throughout. Zero-denominator convention:
// precision (and recall) with an empty denominator are reported as an
// undefined marker, and F1 is 0.0 in that case; degenerate all-negative
// predictors surface instead of silently scoring well.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rave/model.hpp"

namespace rave {

struct ConfusionCounts {
    long long tp = 0, fp = 0, tn = 0, fn = 0;
    long long total() const { return tp + fp + tn + fn; }
};

struct EvalReport {
    Strategy strategy = Strategy::Rave;
    std::string dataset;
    ConfusionCounts counts;
    double accuracy = 0.0;
    std::optional<double> precision;  // empty when tp+fp == 0
    std::optional<double> recall;     // empty when tp+fn == 0
    double f1 = 0.0;
    std::map<std::string, std::string> config_snapshot;
    int unparseable_count = 0;  // excluded from counts, reported separately
};

// 2pr/(p+r), 0.0 when p+r == 0.
double f1_from_precision_recall(double precision, double recall);

// ---------------------------------------------------------------------------
// Ingestion

enum class CorpusFormat { Canonical, Ct22Tsv, Policlaim };

std::string to_string(CorpusFormat format);
std::optional<CorpusFormat> corpus_format_from_string(std::string_view s);

// Label vocabulary for a dataset, shipped as a config asset. Tokens are
// matched after trimming and ASCII lowercasing.
struct LabelMap {
    std::map<std::string, VerifiabilityLabel> tokens;

    static LabelMap load(const std::string& path);
    std::optional<VerifiabilityLabel> map(const std::string& token) const;
};

// Reads and validates a corpus. Canonical files are claim records; the TSV
// and CSV adapters locate id/text/label columns by header name and map
// label tokens through the LabelMap. Unknown label tokens raise an
// IngestError listing every offending line; duplicate ids are an error.
std::vector<Claim> ingest_corpus(const std::string& path, CorpusFormat format,
                                 const LabelMap* label_map = nullptr);

// ---------------------------------------------------------------------------
// Metrics

// Scores decisions against gold labels. Every decision must have a gold
// label; claims that produced no decision are passed via unparseable_count
// and excluded from the confusion counts.
EvalReport compute_metrics(const std::vector<Decision>& decisions,
                           const std::map<std::string, VerifiabilityLabel>& golds,
                           int unparseable_count = 0);

// ---------------------------------------------------------------------------
// Alpha tuning

struct AlphaPoint {
    double alpha = 0.0;
    double mean_f1 = 0.0;
    double std_error = 0.0;  // bootstrap standard error of F1
};

struct AlphaTuneResult {
    std::vector<AlphaPoint> points;  // grid order
    double chosen_alpha = 0.6;
};

enum class OneSePrefer { Smaller, Larger };

struct AlphaTuneConfig {
    std::vector<double> grid = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    int bootstrap_resamples = 1000;
    std::uint64_t seed = 42;
    OneSePrefer prefer = OneSePrefer::Smaller;
};

// Predicted label for one claim at a given alpha; nullopt counts as
// unparseable for that alpha.
using AlphaDecideFn =
    std::function<std::optional<VerifiabilityLabel>(const Claim& claim, double alpha)>;

// Grid search with the one-standard-error rule: among grid points whose
// mean F1 lies within one standard error of the best point, the preferred
// direction picks the candidate. Exact ties for the best mean resolve to
// 0.6 when it is among them. Bootstrap SEs are seeded per grid point and
// replay-stable.
AlphaTuneResult tune_alpha(const std::vector<Claim>& dev_claims, const AlphaTuneConfig& config,
                           const AlphaDecideFn& decide_fn);

// ---------------------------------------------------------------------------
// K sweep

struct KSweepRow {
    int k = 0;
    EvalReport report;
};

using EvaluateAtKFn = std::function<EvalReport(int k)>;

// Evaluates each requested k; a failing k is logged and skipped, remaining
// ks still run.
std::vector<KSweepRow> sweep_k(const std::vector<int>& k_values, const EvaluateAtKFn& evaluate);

// CSV with the fixed header "k,accuracy,precision,recall,f1"; undefined
// metrics render as "NA".
void write_sweep_csv(const std::string& path, const std::vector<KSweepRow>& rows);

// Standalone SVG line chart of the four metrics against K.
void write_sweep_chart(const std::string& path, const std::vector<KSweepRow>& rows);

// ---------------------------------------------------------------------------
// Corpus statistics

struct EntitySparsityRow {
    std::optional<VerifiabilityLabel> label;  // nullopt = unlabeled claims
    int claims = 0;
    int zero_entity = 0;
    double fraction = 0.0;  // zero_entity / claims
};

// Per-label fraction of claims whose extraction produced zero entities.
std::vector<EntitySparsityRow> corpus_stats(const std::vector<Claim>& claims,
                                            const std::vector<ExtractionResult>& extractions);

// ---------------------------------------------------------------------------
// Misclassification export

// Writes one record per FP/FN (plus a header record) with everything needed
// to re-render the decision prompt: claim text, evidence, stats when the
// strategy used them, and the template digest. Returns the number of error
// records written.
int export_errors(const std::string& path, const std::vector<Decision>& decisions,
                  const std::map<std::string, VerifiabilityLabel>& golds,
                  const std::map<std::string, Claim>& claims_by_id,
                  const std::map<std::string, RetrievalStats>& stats_by_claim,
                  const std::string& decision_template_digest);

}  // namespace rave
