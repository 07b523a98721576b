#pragma once
// Dataset loading/storing (JSON Lines), rule-based Math domain generation,
// and the stratified dev/test split.

#include <cstdint>
#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include "calib/core.hpp"
#include "calib/rng.hpp"

namespace calib {

struct DatasetMeta {
    std::string name;
    std::uint64_t seed = 0;
    std::string generator_version;
};

struct Dataset {
    std::vector<Question> questions;
    DatasetMeta meta;

    // Question count per (domain, answer_count) cell.
    std::map<std::pair<Domain, int>, std::size_t> cell_counts() const;
};

// The five rule-based number types of the Math domain.
enum class NumberType { Prime, Square, Cube, Fibonacci, Triangular };

std::string_view to_string(NumberType t);

inline constexpr NumberType kAllNumberTypes[] = {
    NumberType::Prime, NumberType::Square, NumberType::Cube,
    NumberType::Fibonacci, NumberType::Triangular,
};

inline constexpr std::int64_t kNumberUniverseMax = 1'000'000;

// Exact membership over [0, 10^6]. Natural-number indexing starts at 1
// (squares/cubes/triangulars of k >= 1; Fibonacci starts 1, 1, 2, ...), so
// 0 belongs to no type. Throws std::out_of_range above 10^6 or below 0.
bool is_member(std::int64_t n, NumberType t);

// All members of the type within [0, 10^6], ascending.
const std::vector<std::int64_t>& members_of(NumberType t);

// A question instantiating the Math prompt template over a window [L, U]
// that contains exactly k members of the type. L is sampled uniformly; U is
// sampled between the k-th member above L and the next member (capped at
// the universe bound). Deterministic given the rng state. Throws
// UnsatisfiableError after 10^4 failed window attempts.
Question make_math_question(NumberType t, int k, Rng& rng);

// The full rule-based Math domain: `per_setting` questions for each answer
// count in {1,2,4,6}, spread evenly over the five number types, deduplicated
// on identical (type, L, U) windows.
Dataset generate_math_dataset(std::size_t per_setting, std::uint64_t seed);

// Stratified by (domain, answer_count): every stratum contributes
// floor(frac * stratum size) questions to the dev split, chosen by a
// seed-deterministic shuffle. Throws EmptyCellError if a stratum would
// contribute zero. Question order within each part follows the input.
std::pair<Dataset, Dataset> split_dev_test(const Dataset& ds, double frac, std::uint64_t seed);

// --- JSON Lines persistence -------------------------------------------------
// Dataset file: one object per question
//   {"id","domain","text","answer_count","ground_truth":[..]}
// Sample file: one object per (question, sample)
//   {"question_id","sample_index","text","tokens":[{"token","logprob"}],
//    "verbalized_conf"?,"aux"?:[{"candidate","conf"}],"chosen":bool}
// Malformed input raises SchemaViolationError carrying the line number.

void store_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

void store_samples(std::span<const SampleBatch> batches, const std::filesystem::path& path);
std::vector<SampleBatch> load_samples(const std::filesystem::path& path);

// Joins a dataset with its sample file. Samples referencing unknown
// question ids raise SchemaViolationError; questions without samples are
// omitted (a partially sampled run is valid input).
std::vector<std::pair<Question, SampleBatch>> load_records(
    const std::filesystem::path& dataset_path, const std::filesystem::path& samples_path);

}  // namespace calib
