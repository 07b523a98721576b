#pragma once
// Partition a sample batch into semantic-equivalence clusters and compute
// per-cluster probability mass. Substrate for semantic entropy, consistency,
// the aggregation estimators, and knowledge coverage.

#include <functional>
#include <vector>

#include "calib/core.hpp"

namespace calib {

// Judges whether two response texts express the same answer.
using EquivalenceJudge = std::function<bool(const std::string&, const std::string&)>;

// Canonical-text equality (see canonical_answer).
EquivalenceJudge rule_based_equivalence();

// Greedy first-fit clustering in sample order: each sample joins the first
// existing cluster whose representative it is judged equivalent to, else it
// founds a new cluster. The result is always a valid partition, even when
// the judge is not transitive.
ClusterSet cluster(const SampleBatch& batch, const EquivalenceJudge& judge);

// Mass of one cluster: sum of sequence probabilities over its member texts.
// With dedup (default) each distinct text is counted once, so repeated
// identical sequences cannot multiply-count one sequence's probability.
// Members without logprobs are excluded. Throws NoProbabilisticMembersError
// if no member has logprobs.
double cluster_mass(const Cluster& c, const SampleBatch& batch, bool dedup = true);

// Fills mass, counted_members, skipped_no_logprob, and distinct_probs for
// every cluster. Throws NoProbabilisticMembersError if any cluster has no
// member with logprobs.
void attach_masses(ClusterSet& cs, const SampleBatch& batch, bool dedup = true);

// Masses rescaled to sum to 1. Throws ZeroMassError if the total is zero.
std::vector<double> normalized_masses(const ClusterSet& cs);

}  // namespace calib
