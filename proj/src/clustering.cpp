#include "calib/clustering.hpp"

#include <set>
#include <string>

namespace calib {

EquivalenceJudge rule_based_equivalence() {
    return [](const std::string& a, const std::string& b) {
        return canonical_answer(a) == canonical_answer(b);
    };
}

ClusterSet cluster(const SampleBatch& batch, const EquivalenceJudge& judge) {
    if (batch.samples.empty()) throw std::invalid_argument("cannot cluster an empty batch");

    ClusterSet cs;
    cs.total_samples = batch.samples.size();
    for (std::size_t i = 0; i < batch.samples.size(); ++i) {
        const std::string& text = batch.samples[i].text;
        bool placed = false;
        for (Cluster& c : cs.clusters) {
            if (judge(text, c.representative)) {
                c.member_indices.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) {
            Cluster c;
            c.representative = text;
            c.member_indices.push_back(i);
            cs.clusters.push_back(std::move(c));
        }
    }

    std::size_t covered = 0;
    for (const Cluster& c : cs.clusters) covered += c.member_indices.size();
    if (covered != cs.total_samples)
        throw std::logic_error("cluster partition does not cover the batch");
    return cs;
}

namespace {

// Shared by cluster_mass and attach_masses; optionally collects the distinct
// (text, probability) pairs behind the mass.
double mass_of(const Cluster& c, const SampleBatch& batch, bool dedup,
               std::size_t* counted, std::size_t* skipped,
               std::vector<std::pair<std::string, double>>* distinct) {
    std::set<std::string_view> seen;
    double mass = 0.0;
    std::size_t n_counted = 0, n_skipped = 0;
    for (std::size_t idx : c.member_indices) {
        const ResponseSample& s = batch.samples.at(idx);
        if (!s.has_logprobs()) {
            ++n_skipped;
            continue;
        }
        if (dedup && !seen.insert(s.text).second) continue;
        const double p = sequence_probability(s);
        mass += p;
        ++n_counted;
        if (distinct) distinct->emplace_back(s.text, p);
    }
    if (n_counted == 0)
        throw NoProbabilisticMembersError("cluster '" + c.representative +
                                          "' has no members with logprobs");
    if (counted) *counted = n_counted;
    if (skipped) *skipped = n_skipped;
    return mass;
}

}  // namespace

double cluster_mass(const Cluster& c, const SampleBatch& batch, bool dedup) {
    return mass_of(c, batch, dedup, nullptr, nullptr, nullptr);
}

void attach_masses(ClusterSet& cs, const SampleBatch& batch, bool dedup) {
    for (Cluster& c : cs.clusters) {
        c.distinct_probs.clear();
        c.mass = mass_of(c, batch, dedup, &c.counted_members, &c.skipped_no_logprob,
                         &c.distinct_probs);
    }
}

std::vector<double> normalized_masses(const ClusterSet& cs) {
    double total = 0.0;
    for (const Cluster& c : cs.clusters) total += c.mass;
    if (!(total > 0.0)) throw ZeroMassError{};
    std::vector<double> out;
    out.reserve(cs.clusters.size());
    for (const Cluster& c : cs.clusters) out.push_back(c.mass / total);
    return out;
}

}  // namespace calib
