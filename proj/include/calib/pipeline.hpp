#pragma once
// Drivers connecting the pipeline stages through the documented JSON Lines
// schemas: score sample records with all requested estimators, persist
// scores/labels, evaluate mixed-cardinality pools, and tune aggregation
// thresholds on a dev split. Used by both the CLI and the test suites.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "calib/core.hpp"
#include "calib/dataset.hpp"
#include "calib/estimators.hpp"
#include "calib/llm_client.hpp"
#include "calib/metrics.hpp"

namespace calib {

// Second-turn elicitation results for one (question, method): the raw reply
// texts and, for probability variants, the verdict token's top logprobs.
struct SecondTurn {
    std::vector<std::string> texts;
    std::vector<TokenProb> top_logprobs;
};

using SecondTurnMap = std::map<std::pair<std::string, Method>, SecondTurn>;

void store_second_turns(const SecondTurnMap& turns, const std::filesystem::path& path);
SecondTurnMap load_second_turns(const std::filesystem::path& path);

struct ScoreOptions {
    std::vector<Method> methods;  // empty = every method
    EstimatorConfig estimator;
    Judge judge;
    int jobs = 1;
};

struct QuestionScores {
    std::string question_id;
    Domain domain = Domain::Synthetic;
    int answer_count = 1;
    bool correct = false;       // judged on the chosen sample
    int coverage = -1;          // knowledge coverage at estimator tau; -1 if masses unavailable
    std::map<Method, std::optional<ConfidenceEstimate>> estimates;  // nullopt = missing
};

// Clusters each batch, judges the chosen answer, and runs every requested
// estimator. A method that cannot be scored for a question (parse failure,
// missing logprobs or second-turn data) is recorded as missing, never as a
// default value. Results are ordered like the input regardless of jobs.
std::vector<QuestionScores> score_records(
    std::span<const std::pair<Question, SampleBatch>> records, const ScoreOptions& opts,
    const SecondTurnMap* second_turns = nullptr);

// Score file: one {"question_id","method","raw","orientation","confidence",
// "rank_score"} row per computed estimate, plus {"missing":true} rows for
// skipped (question, method) pairs. Label file: one row per question.
void store_scores(std::span<const QuestionScores> scores, const std::filesystem::path& path);
void store_labels(std::span<const QuestionScores> scores, const std::filesystem::path& path);

struct LoadedScores {
    std::vector<EvalRecord> records;
    std::map<std::pair<Method, Domain>, std::size_t> parse_failures;
    std::map<std::string, int> coverage;  // per question, -1 when unavailable
};

LoadedScores load_scores(const std::filesystem::path& scores_path,
                         const std::filesystem::path& labels_path);

// Rows for every (method, pool) combination, per-domain plus macro.
std::vector<MetricRow> evaluate(const LoadedScores& loaded, std::span<const PoolSpec> pools,
                                std::span<const Method> methods);

void write_report_csv(std::span<const MetricRow> rows, const std::filesystem::path& path);
// Markdown matrix of macro-AUROC x 100: methods as rows, pools as columns.
void write_report_markdown(std::span<const MetricRow> rows, const std::filesystem::path& path);

// Builds tune records (clusters + labels) from raw records.
std::vector<TuneRecord> make_tune_records(
    std::span<const std::pair<Question, SampleBatch>> records, const Judge& judge, bool dedup);

struct TuneOutcome {
    double tau = 0.0;
    double dev_auroc = 0.0;
    double test_auroc = 0.0;  // at the tuned tau, on the held-out part
};

// Splits the questions (stratified, dev_frac to dev), tunes tau on dev by
// macro-AUROC, and reports the test AUROC at the tuned threshold.
TuneOutcome tune_on_split(std::span<const std::pair<Question, SampleBatch>> records,
                          Method method, std::span<const double> grid, double dev_frac,
                          std::uint64_t seed, const Judge& judge, bool dedup);

}  // namespace calib
