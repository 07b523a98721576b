#pragma once
// Synthetic answer-distribution models: a desk-scale oracle for studying how
// estimators behave when questions admit several valid answers. Sampled
// batches carry fabricated single-token logprobs so that every sample's
// sequence probability equals its answer's categorical weight, which makes
// estimator expectations computable in closed form.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "calib/core.hpp"
#include "calib/dataset.hpp"

namespace calib {

struct WeightedAnswer {
    std::string text;
    double weight = 1.0;  // > 0, relative
};

struct SyntheticModel {
    std::vector<WeightedAnswer> knowledge;      // the model's known answers
    std::vector<WeightedAnswer> noise_answers;  // spurious answers, never in ground truth
    std::size_t coverage_cap = 1;  // how many distinct support entries the model can produce
    std::uint64_t seed = 0;

    std::size_t support_size() const { return knowledge.size() + noise_answers.size(); }
};

// n i.i.d. draws from the weight distribution restricted to the first
// coverage_cap entries of knowledge followed by noise_answers. Each sample
// gets a single pseudo-token with logprob = ln(normalized weight).
// Deterministic per (model.seed, question id); chosen_index is 0.
SampleBatch synth_sample(const SyntheticModel& model, const Question& q, std::size_t n);

// ---------------------------------------------------------------------------
// Benchmark generation
// ---------------------------------------------------------------------------

// How one slice of questions behaves: how much probability mass the model
// puts on the correct answers and how the rest is spread over noise.
// heavy noise = few confidently-wrong answers, diffuse noise = a long tail.
struct AnswerProfile {
    std::string name = "knows";
    double fraction = 1.0;      // share of each cell's questions
    double correct_mass = 1.0;  // total weight on the ground-truth answers
    int heavy_noise = 0;
    double heavy_noise_mass = 0.0;
    int diffuse_noise = 0;
    double diffuse_noise_mass = 0.0;
    std::size_t coverage_cap = 0;  // 0 = the full support
    bool knows = true;             // label for knows/doesn't-know analyses
};

struct BenchmarkSpec {
    std::vector<Domain> domains = {Domain::Award, Domain::Office, Domain::Region,
                                   Domain::Math,  Domain::River,  Domain::Language};
    std::vector<int> cardinalities = {1, 2, 4, 6};
    std::size_t questions_per_cell = 100;
    std::size_t samples_per_question = 10;
    std::vector<AnswerProfile> profiles;  // empty = default knows/uncertain mix

    void validate() const;

    // TOML-style key = value file with [profile.<name>] sections.
    static BenchmarkSpec from_file(const std::filesystem::path& path);
    static std::vector<AnswerProfile> default_profiles();
};

struct SynthBenchmark {
    Dataset dataset;
    std::vector<SampleBatch> batches;   // one per question, same order
    std::vector<std::string> profile_of;  // profile name per question
};

// One question per (domain, cardinality, index) cell slot, with the cell's
// questions split across profiles by their fractions. Ground-truth answers
// and noise strings are unique per question, so rule-based judging is exact.
// Fully deterministic per (spec, seed).
SynthBenchmark synth_benchmark(const BenchmarkSpec& spec, std::uint64_t seed);

// The per-question synthetic model the benchmark uses; exposed so tests can
// compute closed-form expectations for a given question.
SyntheticModel benchmark_model(const Question& q, const AnswerProfile& profile,
                               std::uint64_t seed);

}  // namespace calib
