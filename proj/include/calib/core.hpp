#pragma once
// Core domain types shared by every module: questions with multi-answer
// ground truth, sampled responses with token logprobs, semantic clusters,
// and oriented confidence estimates.

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace calib {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct CalibError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sample carries no token logprobs; probability-based paths must reject it.
struct EmptyTokensError : CalibError {
    EmptyTokensError() : CalibError("sample has no token logprobs") {}
};

struct LogprobsUnavailableError : CalibError {
    explicit LogprobsUnavailableError(const std::string& what = "token logprobs unavailable")
        : CalibError(what) {}
};

struct UnsatisfiableError : CalibError {
    using CalibError::CalibError;
};

struct EmptyCellError : CalibError {
    using CalibError::CalibError;
};

struct SchemaViolationError : CalibError {
    SchemaViolationError(const std::string& what, std::size_t line_number)
        : CalibError(what + " (line " + std::to_string(line_number) + ")"), line(line_number) {}
    std::size_t line;
};

struct ZeroMassError : CalibError {
    ZeroMassError() : CalibError("total cluster mass is zero") {}
};

struct NoProbabilisticMembersError : CalibError {
    explicit NoProbabilisticMembersError(const std::string& what = "cluster has no members with logprobs")
        : CalibError(what) {}
};

struct DegenerateLabelsError : CalibError {
    explicit DegenerateLabelsError(const std::string& what = "need at least one positive and one negative label")
        : CalibError(what) {}
};

struct MissingContextError : CalibError {
    using CalibError::CalibError;
};

struct TransportError : CalibError {
    using CalibError::CalibError;
};

// A method cannot be scored for this question (parse failure, missing
// elicitation data, zero weight). The scoring driver records the
// (question, method) pair as missing instead of inventing a default.
struct NotScorableError : CalibError {
    using CalibError::CalibError;
};

// ---------------------------------------------------------------------------
// Enums
// ---------------------------------------------------------------------------

enum class Domain { Award, Office, Region, Math, River, Language, Synthetic };

std::string_view to_string(Domain d);
Domain domain_from_string(std::string_view s);

// All implemented confidence/uncertainty estimators.
enum class Method {
    ProbEntropy,
    NormProbEntropy,
    SemanticEntropy,
    Verb,
    VerbTopk,
    Consistency,
    ConsisVerb,
    ConsisVerbTopk,
    Perplexity,
    PTrueConsis,
    PTrueProb,
    PTrueConsisCand,
    PTrueProbCand,
    SelfAsk,
    SelfAskCand,
    Sca,
    Snca,
    Sfca,
};

inline constexpr Method kAllMethods[] = {
    Method::ProbEntropy,    Method::NormProbEntropy, Method::SemanticEntropy,
    Method::Verb,           Method::VerbTopk,        Method::Consistency,
    Method::ConsisVerb,     Method::ConsisVerbTopk,  Method::Perplexity,
    Method::PTrueConsis,    Method::PTrueProb,       Method::PTrueConsisCand,
    Method::PTrueProbCand,  Method::SelfAsk,         Method::SelfAskCand,
    Method::Sca,            Method::Snca,            Method::Sfca,
};

// Stable string ids used in CLI flags, score files, and reports.
std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

enum class Orientation { Confidence, Uncertainty };

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct Question {
    std::string id;
    Domain domain = Domain::Synthetic;
    std::string text;
    int answer_count = 1;                  // one of {1, 2, 4, 6}
    std::set<std::string> ground_truth;    // canonical answer strings

    // Throws std::invalid_argument if the invariants do not hold.
    void validate() const;
};

struct TokenProb {
    std::string token;
    double logprob = 0.0;  // natural log, finite, <= 0
};

struct AuxCandidate {
    std::string candidate;
    double conf = 0.0;  // in [0, 1]
};

struct ResponseSample {
    std::string text;
    std::vector<TokenProb> tokens;          // empty when the backend gave no logprobs
    std::optional<double> verbalized_conf;  // parsed from the response, in [0, 1]
    std::vector<AuxCandidate> aux;          // top-k candidate/confidence pairs

    bool has_logprobs() const { return !tokens.empty(); }
};

struct SampleBatch {
    std::string question_id;
    std::vector<ResponseSample> samples;  // length M >= 1
    std::size_t chosen_index = 0;         // the sample treated as the final answer

    std::size_t size() const { return samples.size(); }
    const ResponseSample& chosen() const { return samples.at(chosen_index); }
};

struct Cluster {
    std::string representative;              // text of the founding member
    std::vector<std::size_t> member_indices; // sample indices, ascending
    double mass = 0.0;                       // sum of distinct member sequence probabilities
    std::size_t counted_members = 0;         // members that contributed to mass
    std::size_t skipped_no_logprob = 0;      // members excluded for missing logprobs

    // Distinct (text, sequence probability) pairs behind `mass`, filled by
    // attach_masses. Kept so aggregations can re-sum in a canonical order.
    std::vector<std::pair<std::string, double>> distinct_probs;

    std::size_t size() const { return member_indices.size(); }
};

struct ClusterSet {
    std::vector<Cluster> clusters;
    std::size_t total_samples = 0;
};

struct ConfidenceEstimate {
    Method method = Method::Sca;
    double raw = 0.0;
    Orientation orientation = Orientation::Confidence;
    double confidence = 0.0;  // raw mapped to [0, 1]
};

// Confidence orientation clamps; uncertainty maps through exp(-raw).
ConfidenceEstimate make_confidence(Method m, double raw);
ConfidenceEstimate make_uncertainty(Method m, double raw);

// Value used by rank metrics (AUROC, Spearman): raw for confidence-oriented
// estimates, negated raw for uncertainty-oriented ones. Unclamped so that
// order information above 1.0 is preserved.
double rank_score(const ConfidenceEstimate& e);

struct EvalRecord {
    std::string question_id;
    Domain domain = Domain::Synthetic;
    int answer_count = 1;
    Method method = Method::Sca;
    double confidence = 0.0;  // clamped to [0, 1]; used by ECE and reporting
    double rank_score = 0.0;  // unclamped; used by AUROC and Spearman
    bool correct = false;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Sum of token logprobs. Throws EmptyTokensError if the sample has none.
double sequence_logprob(const ResponseSample& sample);

// exp of the summed token logprobs, in (0, 1]. Works in log space and
// exponentiates once so long sequences cannot underflow term by term.
double sequence_probability(const ResponseSample& sample);

// Canonical answer text: trimmed, ASCII case-folded, terminal punctuation
// stripped. Used for exact-match equivalence and deduplication.
std::string canonical_answer(std::string_view text);

}  // namespace calib
