#pragma once
// Evaluation metrics: accuracy, mean confidence, AUROC, ECE, knowledge
// coverage, Spearman correlation, mixed answer-cardinality pools with
// macro-averaging across domains, and threshold tuning on a dev split.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calib/core.hpp"

namespace calib {

// Mann-Whitney rank statistic: probability that a random correct record
// outranks a random incorrect one, ties credited 0.5. Throws
// DegenerateLabelsError if either class is absent.
double auroc(std::span<const double> scores, const std::vector<bool>& labels);
double auroc(std::span<const EvalRecord> records);

// Expected calibration error over `bins` equal-width bins on [0, 1],
// right-closed (0 falls into the first bin, 1.0 into the last).
double ece(std::span<const EvalRecord> records, int bins = 10);

double accuracy(std::span<const EvalRecord> records);
double mean_confidence(std::span<const EvalRecord> records);

// Number of clusters whose mass exceeds tau; proxy for how many distinct
// answers the model holds with non-negligible probability.
int knowledge_coverage(const ClusterSet& cs, double tau = 0.1);

// Rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

// An evaluation pool: which answer cardinalities are mixed together.
struct PoolSpec {
    std::vector<int> answer_counts;  // ascending subset of {1,2,4,6}

    bool contains(int answer_count) const;
    std::string label() const;  // e.g. "[1,2,4]"

    // Parses "1,2,4". Throws std::invalid_argument on malformed input.
    static PoolSpec parse(std::string_view text);
    // Parses a semicolon-separated list of pools, e.g. "1;1,2;1,2,4".
    static std::vector<PoolSpec> parse_list(std::string_view text);
};

struct MetricRow {
    std::optional<Domain> domain;  // nullopt = macro average across domains
    Method method = Method::Sca;
    PoolSpec pool;
    std::size_t n = 0;
    double accuracy = 0.0;
    double mean_confidence = 0.0;
    std::optional<double> auroc;  // missing when labels are degenerate
    double ece = 0.0;
    std::size_t parse_failures = 0;
};

// Filters records to the pool's answer counts, computes per-domain metrics,
// then appends the unweighted macro average across domains. Domains whose
// labels are degenerate get no AUROC and are skipped in the AUROC macro.
std::vector<MetricRow> evaluate_pool(std::span<const EvalRecord> records, const PoolSpec& pool,
                                     Method method,
                                     const std::map<Domain, std::size_t>& parse_failures = {});

// One question prepared for threshold tuning: its clusters (with masses
// attached) and its correctness label.
struct TuneRecord {
    std::string question_id;
    Domain domain = Domain::Synthetic;
    int answer_count = 1;
    ClusterSet clusters;
    bool correct = false;
};

struct TuneResult {
    double tau = 0.0;
    double auroc = 0.0;
};

// Returns the grid value maximizing macro-AUROC over the given records,
// ties broken toward smaller tau. Method must be one of sca/snca/sfca.
TuneResult tune_threshold(std::span<const TuneRecord> records, Method method,
                          std::span<const double> grid);

// The default grid {0, 0.05, ..., 1.0}.
std::vector<double> make_default_tau_grid();

}  // namespace calib
