#include "calib/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "calib/rng.hpp"

namespace calib {

SampleBatch synth_sample(const SyntheticModel& model, const Question& q, std::size_t n) {
    if (n < 1) throw std::invalid_argument("need at least one sample");
    if (model.coverage_cap < 1 || model.coverage_cap > model.support_size())
        throw std::invalid_argument("coverage_cap must be in [1, support size]");

    std::vector<const WeightedAnswer*> support;
    support.reserve(model.coverage_cap);
    for (const WeightedAnswer& a : model.knowledge) {
        if (support.size() == model.coverage_cap) break;
        support.push_back(&a);
    }
    for (const WeightedAnswer& a : model.noise_answers) {
        if (support.size() == model.coverage_cap) break;
        support.push_back(&a);
    }

    double total = 0.0;
    std::vector<double> cumulative;
    cumulative.reserve(support.size());
    for (const WeightedAnswer* a : support) {
        if (!(a->weight > 0.0) || !std::isfinite(a->weight))
            throw std::invalid_argument("answer weights must be positive and finite");
        total += a->weight;
        cumulative.push_back(total);
    }

    Rng rng(mix_seed(model.seed, "synth/" + q.id));
    SampleBatch batch;
    batch.question_id = q.id;
    batch.chosen_index = 0;
    batch.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t pick = rng.categorical(cumulative);
        const WeightedAnswer& a = *support[pick];
        ResponseSample s;
        s.text = a.text;
        // One pseudo-token: sequence_probability == normalized weight.
        s.tokens.push_back(TokenProb{a.text, std::log(a.weight / total)});
        batch.samples.push_back(std::move(s));
    }
    return batch;
}

// ---------------------------------------------------------------------------
// Benchmark generation
// ---------------------------------------------------------------------------

std::vector<AnswerProfile> BenchmarkSpec::default_profiles() {
    AnswerProfile knows;
    knows.name = "knows";
    knows.fraction = 0.5;
    knows.correct_mass = 0.9;
    knows.diffuse_noise = 20;
    knows.diffuse_noise_mass = 0.1;
    knows.knows = true;

    AnswerProfile uncertain;
    uncertain.name = "uncertain";
    uncertain.fraction = 0.4;
    uncertain.correct_mass = 0.2;
    uncertain.diffuse_noise = 40;
    uncertain.diffuse_noise_mass = 0.8;
    uncertain.knows = false;

    AnswerProfile confident_wrong;
    confident_wrong.name = "confident_wrong";
    confident_wrong.fraction = 0.1;
    confident_wrong.correct_mass = 0.2;
    confident_wrong.heavy_noise = 2;
    confident_wrong.heavy_noise_mass = 0.6;
    confident_wrong.diffuse_noise = 8;
    confident_wrong.diffuse_noise_mass = 0.2;
    confident_wrong.knows = false;

    return {knows, uncertain, confident_wrong};
}

void BenchmarkSpec::validate() const {
    if (domains.empty()) throw std::invalid_argument("benchmark needs at least one domain");
    if (questions_per_cell == 0) throw std::invalid_argument("questions_per_cell must be >= 1");
    if (samples_per_question == 0) throw std::invalid_argument("samples_per_question must be >= 1");
    for (int k : cardinalities) {
        if (k != 1 && k != 2 && k != 4 && k != 6)
            throw std::invalid_argument("cardinalities must be in {1,2,4,6}");
    }
    double total_fraction = 0.0;
    for (const AnswerProfile& p : profiles) {
        if (p.fraction < 0.0) throw std::invalid_argument("profile fraction must be >= 0");
        if (!(p.correct_mass > 0.0)) throw std::invalid_argument("correct_mass must be > 0");
        total_fraction += p.fraction;
    }
    if (!profiles.empty() && std::abs(total_fraction - 1.0) > 1e-9)
        throw std::invalid_argument("profile fractions must sum to 1");
}

namespace {

std::string trim_copy(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

BenchmarkSpec BenchmarkSpec::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CalibError("cannot open benchmark spec: " + path.string());

    BenchmarkSpec spec;
    spec.profiles.clear();
    AnswerProfile* current = nullptr;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim_copy(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;

        if (stripped.front() == '[') {
            if (stripped.back() != ']')
                throw SchemaViolationError("unterminated section header", line_no);
            const std::string section = stripped.substr(1, stripped.size() - 2);
            constexpr std::string_view kPrefix = "profile.";
            if (section.rfind(kPrefix, 0) != 0)
                throw SchemaViolationError("unknown section '" + section + "'", line_no);
            AnswerProfile p;
            p.name = section.substr(kPrefix.size());
            p.fraction = 0.0;
            p.heavy_noise = 0;
            p.diffuse_noise = 0;
            p.heavy_noise_mass = 0.0;
            p.diffuse_noise_mass = 0.0;
            spec.profiles.push_back(p);
            current = &spec.profiles.back();
            continue;
        }

        const auto eq = stripped.find('=');
        if (eq == std::string::npos) throw SchemaViolationError("expected 'key = value'", line_no);
        const std::string key = trim_copy(stripped.substr(0, eq));
        const std::string value = trim_copy(stripped.substr(eq + 1));
        try {
            if (current == nullptr) {
                if (key == "questions_per_cell") spec.questions_per_cell = std::stoul(value);
                else if (key == "samples_per_question") spec.samples_per_question = std::stoul(value);
                else if (key == "domains") {
                    spec.domains.clear();
                    std::istringstream parts(value);
                    std::string token;
                    while (std::getline(parts, token, ','))
                        spec.domains.push_back(domain_from_string(trim_copy(token)));
                } else if (key == "cardinalities") {
                    spec.cardinalities.clear();
                    std::istringstream parts(value);
                    std::string token;
                    while (std::getline(parts, token, ','))
                        spec.cardinalities.push_back(std::stoi(trim_copy(token)));
                } else {
                    throw SchemaViolationError("unknown key '" + key + "'", line_no);
                }
            } else {
                if (key == "fraction") current->fraction = std::stod(value);
                else if (key == "correct_mass") current->correct_mass = std::stod(value);
                else if (key == "heavy_noise") current->heavy_noise = std::stoi(value);
                else if (key == "heavy_noise_mass") current->heavy_noise_mass = std::stod(value);
                else if (key == "diffuse_noise") current->diffuse_noise = std::stoi(value);
                else if (key == "diffuse_noise_mass") current->diffuse_noise_mass = std::stod(value);
                else if (key == "coverage_cap") current->coverage_cap = std::stoul(value);
                else if (key == "knows") current->knows = (value == "true" || value == "1");
                else throw SchemaViolationError("unknown profile key '" + key + "'", line_no);
            }
        } catch (const std::invalid_argument& e) {
            throw SchemaViolationError(std::string("bad value: ") + e.what(), line_no);
        }
    }
    if (spec.profiles.empty()) spec.profiles = default_profiles();
    spec.validate();
    return spec;
}

SyntheticModel benchmark_model(const Question& q, const AnswerProfile& profile,
                               std::uint64_t seed) {
    SyntheticModel model;
    model.seed = seed;
    const int k = q.answer_count;
    for (const std::string& answer : q.ground_truth) {
        model.knowledge.push_back(WeightedAnswer{answer, profile.correct_mass / k});
    }
    for (int j = 0; j < profile.heavy_noise; ++j) {
        model.noise_answers.push_back(WeightedAnswer{
            "wrong-" + q.id + "-" + std::to_string(j),
            profile.heavy_noise_mass / profile.heavy_noise});
    }
    for (int j = 0; j < profile.diffuse_noise; ++j) {
        model.noise_answers.push_back(WeightedAnswer{
            "noise-" + q.id + "-" + std::to_string(j),
            profile.diffuse_noise_mass / profile.diffuse_noise});
    }
    model.coverage_cap =
        profile.coverage_cap == 0 ? model.support_size()
                                  : std::min(profile.coverage_cap, model.support_size());
    return model;
}

SynthBenchmark synth_benchmark(const BenchmarkSpec& spec_in, std::uint64_t seed) {
    BenchmarkSpec spec = spec_in;
    if (spec.profiles.empty()) spec.profiles = BenchmarkSpec::default_profiles();
    spec.validate();

    // Profile counts per cell: floor(fraction * Q), remainder to the first
    // profiles in order.
    std::vector<std::size_t> per_profile(spec.profiles.size(), 0);
    std::size_t assigned = 0;
    for (std::size_t p = 0; p < spec.profiles.size(); ++p) {
        per_profile[p] = static_cast<std::size_t>(
            std::floor(spec.profiles[p].fraction * static_cast<double>(spec.questions_per_cell)));
        assigned += per_profile[p];
    }
    for (std::size_t p = 0; assigned < spec.questions_per_cell; p = (p + 1) % per_profile.size()) {
        ++per_profile[p];
        ++assigned;
    }

    SynthBenchmark bench;
    bench.dataset.meta = {"synthetic", seed, "synth-v1"};
    for (Domain domain : spec.domains) {
        for (int k : spec.cardinalities) {
            std::size_t serial = 0;
            for (std::size_t p = 0; p < spec.profiles.size(); ++p) {
                const AnswerProfile& profile = spec.profiles[p];
                for (std::size_t i = 0; i < per_profile[p]; ++i, ++serial) {
                    Question q;
                    q.domain = domain;
                    q.answer_count = k;
                    q.id = std::string(to_string(domain)) + "-" + std::to_string(k) + "a-" +
                           profile.name + "-" + std::to_string(serial);
                    q.text = "Name one of the " + std::to_string(k) +
                             " accepted answers for synthetic record " + q.id + ".";
                    for (int j = 0; j < k; ++j) q.ground_truth.insert("ans-" + q.id + "-" +
                                                                      std::to_string(j));
                    q.validate();

                    const SyntheticModel model = benchmark_model(q, profile, seed);
                    bench.batches.push_back(synth_sample(model, q, spec.samples_per_question));
                    bench.dataset.questions.push_back(std::move(q));
                    bench.profile_of.push_back(profile.name);
                }
            }
        }
    }
    return bench;
}

}  // namespace calib
