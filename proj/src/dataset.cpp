#include "calib/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

namespace calib {

using ordered_json = nlohmann::ordered_json;

std::map<std::pair<Domain, int>, std::size_t> Dataset::cell_counts() const {
    std::map<std::pair<Domain, int>, std::size_t> counts;
    for (const Question& q : questions) ++counts[{q.domain, q.answer_count}];
    return counts;
}

std::string_view to_string(NumberType t) {
    switch (t) {
        case NumberType::Prime: return "prime";
        case NumberType::Square: return "square";
        case NumberType::Cube: return "cube";
        case NumberType::Fibonacci: return "fibonacci";
        case NumberType::Triangular: return "triangular";
    }
    return "?";
}

namespace {

void check_universe(std::int64_t n) {
    if (n < 0 || n > kNumberUniverseMax)
        throw std::out_of_range("number out of universe [0, 10^6]: " + std::to_string(n));
}

std::vector<std::int64_t> build_members(NumberType t) {
    std::vector<std::int64_t> out;
    switch (t) {
        case NumberType::Prime: {
            std::vector<bool> composite(kNumberUniverseMax + 1, false);
            for (std::int64_t p = 2; p * p <= kNumberUniverseMax; ++p) {
                if (composite[p]) continue;
                for (std::int64_t q = p * p; q <= kNumberUniverseMax; q += p) composite[q] = true;
            }
            for (std::int64_t n = 2; n <= kNumberUniverseMax; ++n) {
                if (!composite[n]) out.push_back(n);
            }
            break;
        }
        case NumberType::Square:
            for (std::int64_t k = 1; k * k <= kNumberUniverseMax; ++k) out.push_back(k * k);
            break;
        case NumberType::Cube:
            for (std::int64_t k = 1; k * k * k <= kNumberUniverseMax; ++k) out.push_back(k * k * k);
            break;
        case NumberType::Fibonacci: {
            std::int64_t a = 1, b = 1;
            out.push_back(1);  // F_1 = F_2 = 1, the value appears once
            while (true) {
                const std::int64_t c = a + b;
                if (c > kNumberUniverseMax) break;
                out.push_back(c);
                a = b;
                b = c;
            }
            break;
        }
        case NumberType::Triangular:
            for (std::int64_t k = 1; k * (k + 1) / 2 <= kNumberUniverseMax; ++k)
                out.push_back(k * (k + 1) / 2);
            break;
    }
    return out;
}

}  // namespace

const std::vector<std::int64_t>& members_of(NumberType t) {
    static const std::vector<std::int64_t> tables[] = {
        build_members(NumberType::Prime),     build_members(NumberType::Square),
        build_members(NumberType::Cube),      build_members(NumberType::Fibonacci),
        build_members(NumberType::Triangular),
    };
    return tables[static_cast<int>(t)];
}

bool is_member(std::int64_t n, NumberType t) {
    check_universe(n);
    switch (t) {
        case NumberType::Prime: {
            if (n < 2) return false;
            for (std::int64_t d = 2; d * d <= n; ++d) {
                if (n % d == 0) return false;
            }
            return true;
        }
        case NumberType::Square: {
            const auto k = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(n))));
            for (std::int64_t c = std::max<std::int64_t>(1, k - 1); c <= k + 1; ++c) {
                if (c * c == n) return true;
            }
            return false;
        }
        case NumberType::Cube: {
            const auto k = static_cast<std::int64_t>(std::llround(std::cbrt(static_cast<double>(n))));
            for (std::int64_t c = std::max<std::int64_t>(1, k - 1); c <= k + 1; ++c) {
                if (c * c * c == n) return true;
            }
            return false;
        }
        case NumberType::Fibonacci: {
            const auto& fibs = members_of(NumberType::Fibonacci);
            return std::binary_search(fibs.begin(), fibs.end(), n);
        }
        case NumberType::Triangular: {
            if (n < 1) return false;
            const auto k = static_cast<std::int64_t>(
                (std::sqrt(8.0 * static_cast<double>(n) + 1.0) - 1.0) / 2.0);
            for (std::int64_t c = std::max<std::int64_t>(1, k - 1); c <= k + 1; ++c) {
                if (c * (c + 1) / 2 == n) return true;
            }
            return false;
        }
    }
    return false;
}

Question make_math_question(NumberType t, int k, Rng& rng) {
    if (k != 1 && k != 2 && k != 4 && k != 6)
        throw std::invalid_argument("answer count must be in {1,2,4,6}");
    const auto& members = members_of(t);
    if (static_cast<int>(members.size()) < k)
        throw UnsatisfiableError("type has fewer than k members in the universe");

    constexpr int kMaxAttempts = 10'000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const std::int64_t lower = rng.range(0, kNumberUniverseMax);
        const auto it = std::lower_bound(members.begin(), members.end(), lower);
        const auto idx = static_cast<std::size_t>(it - members.begin());
        if (idx + static_cast<std::size_t>(k) > members.size()) continue;  // too few members above L

        // U anywhere between the k-th member and the next one keeps the
        // window content at exactly k.
        const std::int64_t kth = members[idx + k - 1];
        const std::int64_t next = idx + k < members.size() ? members[idx + k]
                                                           : kNumberUniverseMax + 1;
        const std::int64_t hi = std::min(next - 1, kNumberUniverseMax);
        const std::int64_t upper = kth + rng.range(0, hi - kth);

        Question q;
        q.domain = Domain::Math;
        q.answer_count = k;
        q.id = "math-" + std::string(to_string(t)) + "-" + std::to_string(lower) + "-" +
               std::to_string(upper);
        q.text = "Name one " + std::string(to_string(t)) + " number between " +
                 std::to_string(lower) + " and " + std::to_string(upper) + ".";
        for (int i = 0; i < k; ++i) q.ground_truth.insert(std::to_string(members[idx + i]));
        q.validate();
        return q;
    }
    throw UnsatisfiableError("no window with exactly k members found for " +
                             std::string(to_string(t)));
}

Dataset generate_math_dataset(std::size_t per_setting, std::uint64_t seed) {
    Dataset ds;
    ds.meta = {"math", seed, "math-v1"};
    constexpr int kCounts[] = {1, 2, 4, 6};

    for (int k : kCounts) {
        for (NumberType t : kAllNumberTypes) {
            Rng rng(mix_seed(seed, "math/" + std::string(to_string(t)) + "/" + std::to_string(k)));
            const std::size_t want = per_setting / std::size(kAllNumberTypes);
            std::set<std::string> used;  // dedup on identical (type, L, U)
            std::size_t made = 0;
            int stale = 0;
            while (made < want) {
                Question q = make_math_question(t, k, rng);
                if (!used.insert(q.id).second) {
                    if (++stale > 10'000)
                        throw UnsatisfiableError("window space exhausted for " +
                                                 std::string(to_string(t)));
                    continue;
                }
                stale = 0;
                ds.questions.push_back(std::move(q));
                ++made;
            }
        }
    }
    return ds;
}

std::pair<Dataset, Dataset> split_dev_test(const Dataset& ds, double frac, std::uint64_t seed) {
    if (!(frac > 0.0 && frac < 1.0)) throw std::invalid_argument("frac must be in (0, 1)");

    std::map<std::pair<Domain, int>, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < ds.questions.size(); ++i) {
        const Question& q = ds.questions[i];
        strata[{q.domain, q.answer_count}].push_back(i);
    }

    std::vector<bool> in_dev(ds.questions.size(), false);
    for (auto& [key, indices] : strata) {
        const auto n_dev = static_cast<std::size_t>(
            std::floor(frac * static_cast<double>(indices.size())));
        if (n_dev == 0) {
            throw EmptyCellError("stratum (" + std::string(to_string(key.first)) + ", " +
                                 std::to_string(key.second) + ") would receive zero dev items");
        }
        Rng rng(mix_seed(seed, "split/" + std::string(to_string(key.first)) + "/" +
                                   std::to_string(key.second)));
        rng.shuffle(indices);
        for (std::size_t j = 0; j < n_dev; ++j) in_dev[indices[j]] = true;
    }

    Dataset dev, test;
    dev.meta = ds.meta;
    test.meta = ds.meta;
    dev.meta.name = ds.meta.name + "-dev";
    test.meta.name = ds.meta.name + "-test";
    for (std::size_t i = 0; i < ds.questions.size(); ++i) {
        (in_dev[i] ? dev : test).questions.push_back(ds.questions[i]);
    }
    return {std::move(dev), std::move(test)};
}

// --- JSON Lines persistence -------------------------------------------------

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CalibError("cannot open file: " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw CalibError("cannot write file: " + path.string());
    return out;
}

ordered_json parse_line(const std::string& line, std::size_t line_no) {
    try {
        return ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaViolationError(std::string("invalid JSON: ") + e.what(), line_no);
    }
}

template <typename T>
T require_field(const ordered_json& obj, const char* field, std::size_t line_no) {
    if (!obj.contains(field))
        throw SchemaViolationError("missing field '" + std::string(field) + "'", line_no);
    try {
        return obj.at(field).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw SchemaViolationError("field '" + std::string(field) + "' has the wrong type",
                                   line_no);
    }
}

}  // namespace

void store_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    for (const Question& q : ds.questions) {
        ordered_json obj;
        obj["id"] = q.id;
        obj["domain"] = std::string(to_string(q.domain));
        obj["text"] = q.text;
        obj["answer_count"] = q.answer_count;
        obj["ground_truth"] = q.ground_truth;
        out << obj.dump() << "\n";
    }
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    Dataset ds;
    ds.meta.name = path.stem().string();
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const ordered_json obj = parse_line(line, line_no);

        Question q;
        q.id = require_field<std::string>(obj, "id", line_no);
        try {
            q.domain = domain_from_string(require_field<std::string>(obj, "domain", line_no));
        } catch (const std::invalid_argument& e) {
            throw SchemaViolationError(e.what(), line_no);
        }
        q.text = require_field<std::string>(obj, "text", line_no);
        q.answer_count = require_field<int>(obj, "answer_count", line_no);
        for (const auto& ans : require_field<std::vector<std::string>>(obj, "ground_truth", line_no))
            q.ground_truth.insert(ans);
        try {
            q.validate();
        } catch (const std::invalid_argument& e) {
            throw SchemaViolationError(e.what(), line_no);
        }
        if (!ids.insert(q.id).second)
            throw SchemaViolationError("duplicate question id '" + q.id + "'", line_no);
        ds.questions.push_back(std::move(q));
    }
    return ds;
}

void store_samples(std::span<const SampleBatch> batches, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    for (const SampleBatch& b : batches) {
        for (std::size_t i = 0; i < b.samples.size(); ++i) {
            const ResponseSample& s = b.samples[i];
            ordered_json obj;
            obj["question_id"] = b.question_id;
            obj["sample_index"] = i;
            obj["text"] = s.text;
            ordered_json tokens = ordered_json::array();
            for (const TokenProb& t : s.tokens) {
                tokens.push_back({{"token", t.token}, {"logprob", t.logprob}});
            }
            obj["tokens"] = std::move(tokens);
            if (s.verbalized_conf) obj["verbalized_conf"] = *s.verbalized_conf;
            if (!s.aux.empty()) {
                ordered_json aux = ordered_json::array();
                for (const AuxCandidate& c : s.aux) {
                    aux.push_back({{"candidate", c.candidate}, {"conf", c.conf}});
                }
                obj["aux"] = std::move(aux);
            }
            obj["chosen"] = (i == b.chosen_index);
            out << obj.dump() << "\n";
        }
    }
}

std::vector<SampleBatch> load_samples(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::vector<SampleBatch> batches;
    std::map<std::string, std::size_t> batch_index;
    std::map<std::string, bool> chosen_seen;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const ordered_json obj = parse_line(line, line_no);

        const auto qid = require_field<std::string>(obj, "question_id", line_no);
        const auto sample_index = require_field<std::size_t>(obj, "sample_index", line_no);

        ResponseSample s;
        s.text = require_field<std::string>(obj, "text", line_no);
        if (!obj.contains("tokens") || !obj.at("tokens").is_array())
            throw SchemaViolationError("missing field 'tokens'", line_no);
        for (const auto& tok : obj.at("tokens")) {
            TokenProb t;
            t.token = require_field<std::string>(tok, "token", line_no);
            t.logprob = require_field<double>(tok, "logprob", line_no);
            if (!std::isfinite(t.logprob))
                throw SchemaViolationError("logprob must be finite", line_no);
            if (t.logprob > 0.0)
                throw SchemaViolationError("logprob > 0 (probability > 1)", line_no);
            s.tokens.push_back(std::move(t));
        }
        if (obj.contains("verbalized_conf")) {
            const auto v = require_field<double>(obj, "verbalized_conf", line_no);
            if (v < 0.0 || v > 1.0)
                throw SchemaViolationError("verbalized_conf outside [0, 1]", line_no);
            s.verbalized_conf = v;
        }
        if (obj.contains("aux")) {
            for (const auto& cand : obj.at("aux")) {
                AuxCandidate c;
                c.candidate = require_field<std::string>(cand, "candidate", line_no);
                c.conf = require_field<double>(cand, "conf", line_no);
                if (c.conf < 0.0 || c.conf > 1.0)
                    throw SchemaViolationError("aux conf outside [0, 1]", line_no);
                s.aux.push_back(std::move(c));
            }
        }
        const bool chosen = require_field<bool>(obj, "chosen", line_no);

        auto [it, fresh] = batch_index.try_emplace(qid, batches.size());
        if (fresh) {
            batches.push_back(SampleBatch{qid, {}, 0});
            chosen_seen[qid] = false;
        }
        SampleBatch& batch = batches[it->second];
        if (sample_index != batch.samples.size())
            throw SchemaViolationError("sample_index out of order for question '" + qid + "'",
                                       line_no);
        if (chosen) {
            if (chosen_seen[qid])
                throw SchemaViolationError("multiple chosen samples for question '" + qid + "'",
                                           line_no);
            chosen_seen[qid] = true;
            batch.chosen_index = sample_index;
        }
        batch.samples.push_back(std::move(s));
    }
    return batches;
}

std::vector<std::pair<Question, SampleBatch>> load_records(
    const std::filesystem::path& dataset_path, const std::filesystem::path& samples_path) {
    const Dataset ds = load_dataset(dataset_path);
    std::vector<SampleBatch> batches = load_samples(samples_path);

    std::map<std::string, const Question*> by_id;
    for (const Question& q : ds.questions) by_id[q.id] = &q;

    std::vector<std::pair<Question, SampleBatch>> records;
    records.reserve(batches.size());
    for (SampleBatch& b : batches) {
        const auto it = by_id.find(b.question_id);
        if (it == by_id.end())
            throw SchemaViolationError("sample references unknown question '" + b.question_id + "'",
                                       0);
        records.emplace_back(*it->second, std::move(b));
    }
    return records;
}

}  // namespace calib
