#pragma once
// Confidence and uncertainty estimators: entropy measures over token
// probabilities, semantic entropy over clusters, verbalized and consistency
// scores, second-turn self-verification scores, and the cluster-mass
// aggregation family (sum / normalized sum / frequency sum above a
// threshold tau).

#include <span>

#include "calib/core.hpp"

namespace calib {

struct EstimatorConfig {
    double tau = 0.1;   // aggregation filter threshold, in [0, 1]
    int top_k = 3;      // candidate list size for top-k elicitation
    bool dedup = true;  // count duplicate sampled sequences once in cluster mass
};

// Mean token-level entropy over all samples:
//   U = -(1/M) * sum_j sum_i p_i * log p_i
// evaluated literally on sampled-token probabilities.
// Throws LogprobsUnavailableError if any sample lacks logprobs.
ConfidenceEstimate prob_entropy(const SampleBatch& batch);

// As prob_entropy, but each sample's inner sum is divided by its length so
// long responses do not dominate.
ConfidenceEstimate norm_prob_entropy(const SampleBatch& batch);

// Shannon entropy of the normalized cluster-mass distribution.
// Requires masses attached (see attach_masses).
ConfidenceEstimate semantic_entropy(const ClusterSet& cs);

// Average negative log-likelihood of the sample's tokens. The confidence
// mapping exp(-U) equals the geometric-mean token probability.
ConfidenceEstimate perplexity(const ResponseSample& sample);

// Share of samples in the majority cluster. Ties between equal-sized
// clusters break toward the lexicographically smallest representative.
ConfidenceEstimate consistency(const SampleBatch& batch, const ClusterSet& cs);

// Consistency weighted by per-sample confidence scores:
//   sum_{i in majority} conf_i / sum_i conf_i.
// `method` selects ConsisVerb or ConsisVerbTopk depending on where the
// per-sample confidences came from. sample_confs must align with the batch.
ConfidenceEstimate weighted_consistency(const SampleBatch& batch, const ClusterSet& cs,
                                        std::span<const double> sample_confs, Method method);

// Pass-through of the sample's verbalized confidence.
ConfidenceEstimate verb(const ResponseSample& sample);

// Maximum confidence among candidates with non-empty answer text.
ConfidenceEstimate verb_topk(std::span<const AuxCandidate> candidates);

// Fraction of True verdicts over repeated second-turn self-verification.
ConfidenceEstimate p_true_consis(std::span<const bool> verdicts, bool with_candidates);

// Renormalized True-token probability from the verdict token's top
// logprobs: p(True family) / (p(True family) + p(False family)), where a
// family is the set of case/space variants of the word.
ConfidenceEstimate p_true_prob(std::span<const TokenProb> top_logprobs, bool with_candidates);

// Verbalized self-assessment from a second turn; the caller parses the
// numeric reply.
ConfidenceEstimate self_ask(double parsed_conf, bool with_candidates);

// Sum of cluster masses over clusters with mass > tau. Raw values may
// exceed 1; they are clamped only in the confidence field, never for
// ranking.
ConfidenceEstimate sca(const ClusterSet& cs, double tau);

// Sum of normalized cluster masses over clusters whose normalized mass
// exceeds tau. Identically 1.0 at tau = 0.
ConfidenceEstimate snca(const ClusterSet& cs, double tau);

// Sum of cluster sample-count shares over clusters whose share exceeds
// tau. Identically 1.0 at tau = 0.
ConfidenceEstimate sfca(const ClusterSet& cs, double tau);

// The [0, 1] confidence view of an estimate (already materialized in the
// confidence field; exposed for symmetry with rank_score).
double to_confidence(const ConfidenceEstimate& e);

// Index of the majority cluster under the consistency tie-break rule.
std::size_t majority_cluster(const ClusterSet& cs);

}  // namespace calib
