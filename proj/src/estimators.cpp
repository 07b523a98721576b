#include "calib/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "calib/clustering.hpp"

namespace calib {

namespace {

void require_masses(const ClusterSet& cs) {
    for (const Cluster& c : cs.clusters) {
        if (c.counted_members == 0)
            throw NoProbabilisticMembersError("cluster '" + c.representative +
                                              "' has no probability mass attached");
    }
}

// Sums the distinct (text, prob) pairs of the selected clusters in a
// canonical text-sorted order, so the result does not depend on how the
// same distinct sequences were grouped into clusters.
double canonical_sum(const ClusterSet& cs, const std::vector<bool>& selected) {
    std::vector<std::pair<std::string_view, double>> leaves;
    for (std::size_t i = 0; i < cs.clusters.size(); ++i) {
        if (!selected[i]) continue;
        for (const auto& [text, p] : cs.clusters[i].distinct_probs) {
            leaves.emplace_back(text, p);
        }
    }
    std::sort(leaves.begin(), leaves.end());
    double sum = 0.0;
    for (const auto& [text, p] : leaves) sum += p;
    return sum;
}

}  // namespace

ConfidenceEstimate prob_entropy(const SampleBatch& batch) {
    if (batch.samples.empty()) throw std::invalid_argument("empty batch");
    double total = 0.0;
    for (const ResponseSample& s : batch.samples) {
        if (!s.has_logprobs())
            throw LogprobsUnavailableError("prob_entropy requires logprobs on every sample");
        for (const TokenProb& t : s.tokens) total += std::exp(t.logprob) * t.logprob;
    }
    return make_uncertainty(Method::ProbEntropy, -total / static_cast<double>(batch.size()));
}

ConfidenceEstimate norm_prob_entropy(const SampleBatch& batch) {
    if (batch.samples.empty()) throw std::invalid_argument("empty batch");
    double total = 0.0;
    for (const ResponseSample& s : batch.samples) {
        if (!s.has_logprobs())
            throw LogprobsUnavailableError("norm_prob_entropy requires logprobs on every sample");
        double inner = 0.0;
        for (const TokenProb& t : s.tokens) inner += std::exp(t.logprob) * t.logprob;
        total += inner / static_cast<double>(s.tokens.size());
    }
    return make_uncertainty(Method::NormProbEntropy, -total / static_cast<double>(batch.size()));
}

ConfidenceEstimate semantic_entropy(const ClusterSet& cs) {
    require_masses(cs);
    double entropy = 0.0;
    for (double p : normalized_masses(cs)) {
        if (p > 0.0) entropy -= p * std::log(p);
    }
    return make_uncertainty(Method::SemanticEntropy, entropy);
}

ConfidenceEstimate perplexity(const ResponseSample& sample) {
    if (!sample.has_logprobs())
        throw LogprobsUnavailableError("perplexity requires logprobs on the chosen sample");
    const double nll = -sequence_logprob(sample) / static_cast<double>(sample.tokens.size());
    return make_uncertainty(Method::Perplexity, nll);
}

std::size_t majority_cluster(const ClusterSet& cs) {
    if (cs.clusters.empty()) throw std::invalid_argument("empty cluster set");
    std::size_t best = 0;
    for (std::size_t i = 1; i < cs.clusters.size(); ++i) {
        const std::size_t sz = cs.clusters[i].size();
        const std::size_t best_sz = cs.clusters[best].size();
        if (sz > best_sz ||
            (sz == best_sz && cs.clusters[i].representative < cs.clusters[best].representative)) {
            best = i;
        }
    }
    return best;
}

ConfidenceEstimate consistency(const SampleBatch& batch, const ClusterSet& cs) {
    if (cs.total_samples != batch.size())
        throw std::invalid_argument("cluster set does not match batch");
    const std::size_t m = majority_cluster(cs);
    const double share = static_cast<double>(cs.clusters[m].size()) /
                         static_cast<double>(cs.total_samples);
    return make_confidence(Method::Consistency, share);
}

ConfidenceEstimate weighted_consistency(const SampleBatch& batch, const ClusterSet& cs,
                                        std::span<const double> sample_confs, Method method) {
    if (method != Method::ConsisVerb && method != Method::ConsisVerbTopk)
        throw std::invalid_argument("weighted_consistency expects a consis_verb* method id");
    if (sample_confs.size() != batch.size())
        throw std::invalid_argument("sample_confs must align with the batch");
    if (cs.total_samples != batch.size())
        throw std::invalid_argument("cluster set does not match batch");

    const Cluster& majority = cs.clusters[majority_cluster(cs)];
    double num = 0.0;
    for (std::size_t idx : majority.member_indices) num += sample_confs[idx];
    double den = 0.0;
    for (double c : sample_confs) den += c;
    if (!(den > 0.0)) throw NotScorableError("total confidence weight is zero");
    return make_confidence(method, num / den);
}

ConfidenceEstimate verb(const ResponseSample& sample) {
    if (!sample.verbalized_conf)
        throw NotScorableError("sample has no parsed verbalized confidence");
    return make_confidence(Method::Verb, *sample.verbalized_conf);
}

ConfidenceEstimate verb_topk(std::span<const AuxCandidate> candidates) {
    double best = -1.0;
    for (const AuxCandidate& c : candidates) {
        if (canonical_answer(c.candidate).empty()) continue;  // not a valid answer string
        best = std::max(best, c.conf);
    }
    if (best < 0.0) throw NotScorableError("no valid top-k candidates");
    return make_confidence(Method::VerbTopk, best);
}

ConfidenceEstimate p_true_consis(std::span<const bool> verdicts, bool with_candidates) {
    if (verdicts.empty()) throw NotScorableError("no self-verification verdicts");
    std::size_t trues = 0;
    for (bool v : verdicts) trues += v ? 1 : 0;
    const Method m = with_candidates ? Method::PTrueConsisCand : Method::PTrueConsis;
    return make_confidence(m, static_cast<double>(trues) / static_cast<double>(verdicts.size()));
}

ConfidenceEstimate p_true_prob(std::span<const TokenProb> top_logprobs, bool with_candidates) {
    // A family is the set of case/space variants of the word among the
    // returned top logprobs; renormalize over the True/False pair.
    double p_true = 0.0, p_false = 0.0;
    bool any = false;
    for (const TokenProb& t : top_logprobs) {
        const std::string canon = canonical_answer(t.token);
        if (canon == "true") {
            p_true += std::exp(t.logprob);
            any = true;
        } else if (canon == "false") {
            p_false += std::exp(t.logprob);
            any = true;
        }
    }
    if (!any) throw NotScorableError("no True/False tokens among top logprobs");
    const Method m = with_candidates ? Method::PTrueProbCand : Method::PTrueProb;
    return make_confidence(m, p_true / (p_true + p_false));
}

ConfidenceEstimate self_ask(double parsed_conf, bool with_candidates) {
    const Method m = with_candidates ? Method::SelfAskCand : Method::SelfAsk;
    return make_confidence(m, parsed_conf);
}

ConfidenceEstimate sca(const ClusterSet& cs, double tau) {
    require_masses(cs);
    std::vector<bool> selected(cs.clusters.size());
    for (std::size_t i = 0; i < cs.clusters.size(); ++i) {
        selected[i] = cs.clusters[i].mass > tau;
    }
    return make_confidence(Method::Sca, canonical_sum(cs, selected));
}

ConfidenceEstimate snca(const ClusterSet& cs, double tau) {
    require_masses(cs);
    std::vector<bool> all(cs.clusters.size(), true);
    const double total = canonical_sum(cs, all);
    if (!(total > 0.0)) throw ZeroMassError{};
    std::vector<bool> selected(cs.clusters.size());
    for (std::size_t i = 0; i < cs.clusters.size(); ++i) {
        selected[i] = cs.clusters[i].mass / total > tau;
    }
    // Single division of canonical sums: with tau = 0 the numerator and
    // denominator are the same sum, so the result is exactly 1.0.
    return make_confidence(Method::Snca, canonical_sum(cs, selected) / total);
}

ConfidenceEstimate sfca(const ClusterSet& cs, double tau) {
    if (cs.clusters.empty() || cs.total_samples == 0)
        throw std::invalid_argument("empty cluster set");
    const double n = static_cast<double>(cs.total_samples);
    std::size_t kept = 0;
    for (const Cluster& c : cs.clusters) {
        if (static_cast<double>(c.size()) / n > tau) kept += c.size();
    }
    return make_confidence(Method::Sfca, static_cast<double>(kept) / n);
}

double to_confidence(const ConfidenceEstimate& e) {
    return e.confidence;
}

}  // namespace calib
