#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cctype>
#include <cmath>
#include <set>

#include "calib/clustering.hpp"
#include "calib/rng.hpp"
#include "oracles.hpp"

using namespace calib;

namespace {

SampleBatch batch_of(std::vector<std::pair<std::string, double>> text_probs) {
    SampleBatch b;
    b.question_id = "q";
    for (auto& [text, prob] : text_probs) {
        ResponseSample s;
        s.text = text;
        s.tokens.push_back({text, std::log(prob)});
        b.samples.push_back(std::move(s));
    }
    return b;
}

void check_partition(const ClusterSet& cs) {
    std::set<std::size_t> seen;
    for (const Cluster& c : cs.clusters) {
        CHECK(!c.member_indices.empty());
        for (std::size_t idx : c.member_indices) CHECK(seen.insert(idx).second);
    }
    CHECK(seen.size() == cs.total_samples);
}

}  // namespace

TEST_CASE("greedy clustering groups equal texts and keeps founders as representatives") {
    const SampleBatch b = batch_of({{"A", 0.5}, {"A", 0.5}, {"B", 0.2}});
    const ClusterSet cs = cluster(b, rule_based_equivalence());
    REQUIRE(cs.clusters.size() == 2);
    CHECK(cs.clusters[0].representative == "A");
    CHECK(cs.clusters[0].member_indices == std::vector<std::size_t>{0, 1});
    CHECK(cs.clusters[1].representative == "B");
    CHECK(cs.clusters[1].member_indices == std::vector<std::size_t>{2});
    check_partition(cs);
}

TEST_CASE("identical texts collapse to a single cluster") {
    const SampleBatch b = batch_of({{"x", 0.1}, {"x", 0.1}, {"x", 0.1}, {"x", 0.1}});
    const ClusterSet cs = cluster(b, rule_based_equivalence());
    CHECK(cs.clusters.size() == 1);
    CHECK(cs.clusters[0].size() == 4);
}

TEST_CASE("noisy casings cluster like the exhaustive transitive-closure oracle") {
    const std::vector<std::string> forms = {"Paris", "Berlin", "Madrid"};
    Rng rng(33);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<std::string> texts;
        for (int i = 0; i < 8; ++i) {
            std::string t = forms[rng.bounded(forms.size())];
            if (rng.bounded(2)) {
                for (char& c : t) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            }
            if (rng.bounded(2)) t += ".";
            if (rng.bounded(2)) t = " " + t + " ";
            texts.push_back(t);
        }

        SampleBatch b;
        b.question_id = "q";
        for (const std::string& t : texts) b.samples.push_back(ResponseSample{t, {}, {}, {}});
        const ClusterSet cs = cluster(b, rule_based_equivalence());
        check_partition(cs);

        std::vector<std::vector<std::size_t>> got;
        for (const Cluster& c : cs.clusters) got.push_back(c.member_indices);
        std::sort(got.begin(), got.end());

        const auto want = oracles::closure_partition(
            texts, [](const std::string& a, const std::string& b) {
                return canonical_answer(a) == canonical_answer(b);
            });
        CHECK(got == want);
    }
}

TEST_CASE("cluster mass sums distinct member sequence probabilities") {
    SUBCASE("distinct members add") {
        const SampleBatch b = batch_of({{"a", 0.4}, {"a.", 0.3}});
        const ClusterSet cs = cluster(b, rule_based_equivalence());
        REQUIRE(cs.clusters.size() == 1);
        CHECK(cluster_mass(cs.clusters[0], b) == doctest::Approx(0.7).epsilon(1e-12));
    }
    SUBCASE("exact duplicates count once") {
        const SampleBatch b = batch_of({{"Paris", 0.4}, {"Paris", 0.4}, {"Paris", 0.4}});
        const ClusterSet cs = cluster(b, rule_based_equivalence());
        REQUIRE(cs.clusters.size() == 1);
        CHECK(cluster_mass(cs.clusters[0], b) == doctest::Approx(0.4).epsilon(1e-12));
    }
    SUBCASE("dedup can be disabled") {
        const SampleBatch b = batch_of({{"Paris", 0.4}, {"Paris", 0.4}});
        const ClusterSet cs = cluster(b, rule_based_equivalence());
        CHECK(cluster_mass(cs.clusters[0], b, /*dedup=*/false) ==
              doctest::Approx(0.8).epsilon(1e-12));
    }
}

TEST_CASE("cluster mass equals the enumeration oracle on random batches") {
    Rng rng(81);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<std::pair<std::string, double>> items;
        const std::size_t n = 2 + rng.bounded(11);  // up to 12 samples
        for (std::size_t i = 0; i < n; ++i) {
            const std::string text = "ans" + std::to_string(rng.bounded(5));
            items.emplace_back(text, 0.05 + 0.9 * rng.next_unit());
        }
        const SampleBatch b = batch_of(items);
        ClusterSet cs = cluster(b, rule_based_equivalence());
        for (const Cluster& c : cs.clusters) {
            CHECK(cluster_mass(c, b) ==
                  doctest::Approx(oracles::distinct_text_mass(c.member_indices, b)).epsilon(1e-12));
        }
    }
}

TEST_CASE("members without logprobs are excluded and flagged") {
    SampleBatch b = batch_of({{"a", 0.4}});
    b.samples.push_back(ResponseSample{"a", {}, {}, {}});  // no logprobs
    ClusterSet cs = cluster(b, rule_based_equivalence());
    attach_masses(cs, b);
    REQUIRE(cs.clusters.size() == 1);
    CHECK(cs.clusters[0].mass == doctest::Approx(0.4));
    CHECK(cs.clusters[0].skipped_no_logprob == 1);
    CHECK(cs.clusters[0].counted_members == 1);
}

TEST_CASE("a cluster with no probabilistic members raises") {
    SampleBatch b;
    b.question_id = "q";
    b.samples.push_back(ResponseSample{"a", {}, {}, {}});
    ClusterSet cs = cluster(b, rule_based_equivalence());
    CHECK_THROWS_AS(cluster_mass(cs.clusters[0], b), NoProbabilisticMembersError);
    CHECK_THROWS_AS(attach_masses(cs, b), NoProbabilisticMembersError);
}

TEST_CASE("adding a distinct member never decreases cluster mass") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::pair<std::string, double>> items;
        const std::size_t n = 1 + rng.bounded(6);
        for (std::size_t i = 0; i < n; ++i)
            items.emplace_back("a" + std::to_string(i), 0.01 + 0.5 * rng.next_unit());
        SampleBatch before = batch_of(items);
        Cluster c;
        c.representative = before.samples[0].text;
        for (std::size_t i = 0; i < before.size(); ++i) c.member_indices.push_back(i);
        const double mass_before = cluster_mass(c, before);

        items.emplace_back("fresh", 0.01 + 0.5 * rng.next_unit());
        SampleBatch after = batch_of(items);
        c.member_indices.push_back(after.size() - 1);
        CHECK(cluster_mass(c, after) >= mass_before);
    }
}

TEST_CASE("normalized masses form a distribution") {
    SUBCASE("equal masses split evenly") {
        const SampleBatch b = batch_of({{"a", 0.3}, {"b", 0.3}});
        ClusterSet cs = cluster(b, rule_based_equivalence());
        attach_masses(cs, b);
        const auto norm = normalized_masses(cs);
        CHECK(norm[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(norm[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("a single cluster gets everything") {
        const SampleBatch b = batch_of({{"a", 0.6}});
        ClusterSet cs = cluster(b, rule_based_equivalence());
        attach_masses(cs, b);
        CHECK(normalized_masses(cs) == std::vector<double>{1.0});
    }
    SUBCASE("random masses sum to one") {
        Rng rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<std::pair<std::string, double>> items;
            for (int i = 0; i < 10; ++i)
                items.emplace_back("a" + std::to_string(i), 0.01 + rng.next_unit() * 0.099);
            const SampleBatch b = batch_of(items);
            ClusterSet cs = cluster(b, rule_based_equivalence());
            attach_masses(cs, b);
            double total = 0.0;
            for (double v : normalized_masses(cs)) total += v;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("zero total mass raises") {
        ClusterSet cs;
        cs.total_samples = 1;
        Cluster c;
        c.representative = "a";
        c.member_indices = {0};
        c.mass = 0.0;
        cs.clusters.push_back(c);
        CHECK_THROWS_AS(normalized_masses(cs), ZeroMassError);
    }
}

TEST_CASE("clustering an empty batch is rejected") {
    SampleBatch b;
    b.question_id = "q";
    CHECK_THROWS_AS(cluster(b, rule_based_equivalence()), std::invalid_argument);
}
