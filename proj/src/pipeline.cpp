#include "calib/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "calib/clustering.hpp"

namespace calib {

using ordered_json = nlohmann::ordered_json;

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

}  // namespace

void store_second_turns(const SecondTurnMap& turns, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    for (const auto& [key, turn] : turns) {
        ordered_json obj;
        obj["question_id"] = key.first;
        obj["method"] = std::string(to_string(key.second));
        obj["texts"] = turn.texts;
        if (!turn.top_logprobs.empty()) {
            ordered_json tokens = ordered_json::array();
            for (const TokenProb& t : turn.top_logprobs)
                tokens.push_back({{"token", t.token}, {"logprob", t.logprob}});
            obj["top_logprobs"] = std::move(tokens);
        }
        out << obj.dump() << "\n";
    }
}

SecondTurnMap load_second_turns(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    SecondTurnMap turns;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const ordered_json obj = parse_line(line, line_no);
        try {
            const auto qid = obj.at("question_id").get<std::string>();
            const Method method = method_from_string(obj.at("method").get<std::string>());
            SecondTurn turn;
            turn.texts = obj.at("texts").get<std::vector<std::string>>();
            if (obj.contains("top_logprobs")) {
                for (const auto& tok : obj.at("top_logprobs")) {
                    turn.top_logprobs.push_back(TokenProb{tok.at("token").get<std::string>(),
                                                          tok.at("logprob").get<double>()});
                }
            }
            turns[{qid, method}] = std::move(turn);
        } catch (const std::exception& e) {
            throw SchemaViolationError(std::string("bad second-turn row: ") + e.what(), line_no);
        }
    }
    return turns;
}

namespace {

// Errors meaning "this method has no value for this question".
template <typename Fn>
std::optional<ConfidenceEstimate> try_estimate(Fn&& fn) {
    try {
        return std::forward<Fn>(fn)();
    } catch (const NotScorableError&) {
    } catch (const LogprobsUnavailableError&) {
    } catch (const NoProbabilisticMembersError&) {
    } catch (const ZeroMassError&) {
    } catch (const EmptyTokensError&) {
    }
    return std::nullopt;
}

const SecondTurn* find_turn(const SecondTurnMap* turns, const std::string& qid, Method m) {
    if (turns == nullptr) return nullptr;
    const auto it = turns->find({qid, m});
    return it == turns->end() ? nullptr : &it->second;
}

std::optional<ConfidenceEstimate> second_turn_estimate(const SecondTurnMap* turns,
                                                       const std::string& qid, Method m) {
    const SecondTurn* turn = find_turn(turns, qid, m);
    if (turn == nullptr) return std::nullopt;
    switch (m) {
        case Method::PTrueConsis:
        case Method::PTrueConsisCand: {
            // Plain buffer rather than vector<bool>, which cannot back a span.
            std::unique_ptr<bool[]> verdicts;
            std::size_t count = 0;
            verdicts.reset(new bool[turn->texts.size()]);
            for (const std::string& text : turn->texts) {
                if (const auto v = parse_true_false(text)) verdicts[count++] = *v;
            }
            if (count == 0) return std::nullopt;
            return try_estimate([&] {
                return p_true_consis(std::span<const bool>(verdicts.get(), count),
                                     m == Method::PTrueConsisCand);
            });
        }
        case Method::PTrueProb:
        case Method::PTrueProbCand:
            return try_estimate(
                [&] { return p_true_prob(turn->top_logprobs, m == Method::PTrueProbCand); });
        case Method::SelfAsk:
        case Method::SelfAskCand: {
            if (turn->texts.empty()) return std::nullopt;
            const auto conf = parse_verbalized(turn->texts.front());
            if (!conf) return std::nullopt;
            return self_ask(*conf, m == Method::SelfAskCand);
        }
        default:
            return std::nullopt;
    }
}

QuestionScores score_one(const Question& q, const SampleBatch& batch, const ScoreOptions& opts,
                         const SecondTurnMap* turns) {
    QuestionScores out;
    out.question_id = q.id;
    out.domain = q.domain;
    out.answer_count = q.answer_count;
    out.correct = opts.judge.correct(batch.chosen().text, q).equivalent_or_correct;

    const EquivalenceJudge equiv = [&](const std::string& a, const std::string& b) {
        return opts.judge.equivalent(a, b).equivalent_or_correct;
    };
    ClusterSet cs = cluster(batch, equiv);
    bool has_masses = true;
    try {
        attach_masses(cs, batch, opts.estimator.dedup);
    } catch (const NoProbabilisticMembersError&) {
        has_masses = false;
    }
    if (has_masses) out.coverage = knowledge_coverage(cs, opts.estimator.tau);

    std::vector<Method> methods = opts.methods;
    if (methods.empty()) methods.assign(std::begin(kAllMethods), std::end(kAllMethods));

    for (Method m : methods) {
        std::optional<ConfidenceEstimate> est;
        switch (m) {
            case Method::ProbEntropy:
                est = try_estimate([&] { return prob_entropy(batch); });
                break;
            case Method::NormProbEntropy:
                est = try_estimate([&] { return norm_prob_entropy(batch); });
                break;
            case Method::SemanticEntropy:
                if (has_masses) est = try_estimate([&] { return semantic_entropy(cs); });
                break;
            case Method::Verb:
                est = try_estimate([&] { return verb(batch.chosen()); });
                break;
            case Method::VerbTopk:
                est = try_estimate([&] { return verb_topk(batch.chosen().aux); });
                break;
            case Method::Consistency:
                est = try_estimate([&] { return consistency(batch, cs); });
                break;
            case Method::ConsisVerb: {
                std::vector<double> confs;
                confs.reserve(batch.size());
                bool complete = true;
                for (const ResponseSample& s : batch.samples) {
                    if (!s.verbalized_conf) {
                        complete = false;
                        break;
                    }
                    confs.push_back(*s.verbalized_conf);
                }
                if (complete)
                    est = try_estimate(
                        [&] { return weighted_consistency(batch, cs, confs, Method::ConsisVerb); });
                break;
            }
            case Method::ConsisVerbTopk: {
                std::vector<double> confs;
                confs.reserve(batch.size());
                bool complete = true;
                for (const ResponseSample& s : batch.samples) {
                    const auto c = try_estimate([&] { return verb_topk(s.aux); });
                    if (!c) {
                        complete = false;
                        break;
                    }
                    confs.push_back(c->raw);
                }
                if (complete)
                    est = try_estimate([&] {
                        return weighted_consistency(batch, cs, confs, Method::ConsisVerbTopk);
                    });
                break;
            }
            case Method::Perplexity:
                est = try_estimate([&] { return perplexity(batch.chosen()); });
                break;
            case Method::PTrueConsis:
            case Method::PTrueConsisCand:
            case Method::PTrueProb:
            case Method::PTrueProbCand:
            case Method::SelfAsk:
            case Method::SelfAskCand:
                est = second_turn_estimate(turns, q.id, m);
                break;
            case Method::Sca:
                if (has_masses)
                    est = try_estimate([&] { return sca(cs, opts.estimator.tau); });
                break;
            case Method::Snca:
                if (has_masses)
                    est = try_estimate([&] { return snca(cs, opts.estimator.tau); });
                break;
            case Method::Sfca:
                est = try_estimate([&] { return sfca(cs, opts.estimator.tau); });
                break;
        }
        out.estimates[m] = est;
    }
    return out;
}

}  // namespace

std::vector<QuestionScores> score_records(
    std::span<const std::pair<Question, SampleBatch>> records, const ScoreOptions& opts,
    const SecondTurnMap* second_turns) {
    std::vector<QuestionScores> results(records.size());

    const int jobs = std::max(1, opts.jobs);
    if (jobs == 1 || records.size() < 2) {
        for (std::size_t i = 0; i < records.size(); ++i) {
            results[i] = score_one(records[i].first, records[i].second, opts, second_turns);
        }
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= records.size()) return;
            try {
                results[i] = score_one(records[i].first, records[i].second, opts, second_turns);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return results;
}

void store_scores(std::span<const QuestionScores> scores, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    for (const QuestionScores& qs : scores) {
        for (const auto& [method, est] : qs.estimates) {
            ordered_json obj;
            obj["question_id"] = qs.question_id;
            obj["method"] = std::string(to_string(method));
            if (est) {
                obj["raw"] = est->raw;
                obj["orientation"] =
                    est->orientation == Orientation::Confidence ? "confidence" : "uncertainty";
                obj["confidence"] = est->confidence;
                obj["rank_score"] = rank_score(*est);
            } else {
                obj["missing"] = true;
            }
            out << obj.dump() << "\n";
        }
    }
}

void store_labels(std::span<const QuestionScores> scores, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    for (const QuestionScores& qs : scores) {
        ordered_json obj;
        obj["question_id"] = qs.question_id;
        obj["domain"] = std::string(to_string(qs.domain));
        obj["answer_count"] = qs.answer_count;
        obj["correct"] = qs.correct;
        obj["knowledge_coverage"] = qs.coverage;
        out << obj.dump() << "\n";
    }
}

LoadedScores load_scores(const std::filesystem::path& scores_path,
                         const std::filesystem::path& labels_path) {
    struct LabelRow {
        Domain domain;
        int answer_count;
        bool correct;
        int coverage;
    };
    std::map<std::string, LabelRow> labels;
    {
        std::ifstream in = open_input(labels_path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const ordered_json obj = parse_line(line, line_no);
            try {
                labels[obj.at("question_id").get<std::string>()] =
                    LabelRow{domain_from_string(obj.at("domain").get<std::string>()),
                             obj.at("answer_count").get<int>(), obj.at("correct").get<bool>(),
                             obj.value("knowledge_coverage", -1)};
            } catch (const std::exception& e) {
                throw SchemaViolationError(std::string("bad label row: ") + e.what(), line_no);
            }
        }
    }

    LoadedScores loaded;
    for (const auto& [qid, row] : labels) loaded.coverage[qid] = row.coverage;

    std::ifstream in = open_input(scores_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const ordered_json obj = parse_line(line, line_no);
        try {
            const auto qid = obj.at("question_id").get<std::string>();
            const Method method = method_from_string(obj.at("method").get<std::string>());
            const auto label = labels.find(qid);
            if (label == labels.end())
                throw SchemaViolationError("score row references unknown question '" + qid + "'",
                                           line_no);
            if (obj.value("missing", false)) {
                ++loaded.parse_failures[{method, label->second.domain}];
                continue;
            }
            EvalRecord rec;
            rec.question_id = qid;
            rec.domain = label->second.domain;
            rec.answer_count = label->second.answer_count;
            rec.method = method;
            rec.confidence = obj.at("confidence").get<double>();
            rec.rank_score = obj.at("rank_score").get<double>();
            rec.correct = label->second.correct;
            loaded.records.push_back(std::move(rec));
        } catch (const SchemaViolationError&) {
            throw;
        } catch (const std::exception& e) {
            throw SchemaViolationError(std::string("bad score row: ") + e.what(), line_no);
        }
    }
    return loaded;
}

std::vector<MetricRow> evaluate(const LoadedScores& loaded, std::span<const PoolSpec> pools,
                                std::span<const Method> methods) {
    std::vector<MetricRow> rows;
    for (const Method method : methods) {
        std::map<Domain, std::size_t> failures;
        for (const auto& [key, count] : loaded.parse_failures) {
            if (key.first == method) failures[key.second] = count;
        }
        for (const PoolSpec& pool : pools) {
            auto pool_rows = evaluate_pool(loaded.records, pool, method, failures);
            rows.insert(rows.end(), std::make_move_iterator(pool_rows.begin()),
                        std::make_move_iterator(pool_rows.end()));
        }
    }
    return rows;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

void write_report_csv(std::span<const MetricRow> rows, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << "domain,method,pool,n,accuracy,mean_confidence,auroc,ece,parse_failures\n";
    for (const MetricRow& row : rows) {
        out << (row.domain ? std::string(to_string(*row.domain)) : std::string("macro")) << ","
            << to_string(row.method) << "," << "\"" << row.pool.label() << "\"" << "," << row.n
            << "," << fmt(row.accuracy) << "," << fmt(row.mean_confidence) << ","
            << (row.auroc ? fmt(*row.auroc) : std::string()) << "," << fmt(row.ece) << ","
            << row.parse_failures << "\n";
    }
}

void write_report_markdown(std::span<const MetricRow> rows, const std::filesystem::path& path) {
    // Macro AUROC (x100) per method, columns in first-seen pool order.
    std::vector<std::string> pool_order;
    std::map<std::string, std::map<Method, std::optional<double>>> cells;
    for (const MetricRow& row : rows) {
        if (row.domain) continue;
        const std::string label = row.pool.label();
        if (std::find(pool_order.begin(), pool_order.end(), label) == pool_order.end())
            pool_order.push_back(label);
        cells[label][row.method] = row.auroc;
    }

    std::ofstream out = open_output(path);
    out << "| Method |";
    for (const std::string& pool : pool_order) out << " " << pool << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < pool_order.size(); ++i) out << "---|";
    out << "\n";
    for (const Method method : kAllMethods) {
        bool any = false;
        for (const std::string& pool : pool_order) {
            if (cells[pool].count(method)) any = true;
        }
        if (!any) continue;
        out << "| " << to_string(method) << " |";
        for (const std::string& pool : pool_order) {
            const auto it = cells[pool].find(method);
            if (it == cells[pool].end() || !it->second) {
                out << " -- |";
            } else {
                char buf[16];
                std::snprintf(buf, sizeof buf, "%.1f", *it->second * 100.0);
                out << " " << buf << " |";
            }
        }
        out << "\n";
    }
}

std::vector<TuneRecord> make_tune_records(
    std::span<const std::pair<Question, SampleBatch>> records, const Judge& judge, bool dedup) {
    const EquivalenceJudge equiv = [&](const std::string& a, const std::string& b) {
        return judge.equivalent(a, b).equivalent_or_correct;
    };
    std::vector<TuneRecord> out;
    out.reserve(records.size());
    for (const auto& [q, batch] : records) {
        TuneRecord rec;
        rec.question_id = q.id;
        rec.domain = q.domain;
        rec.answer_count = q.answer_count;
        rec.correct = judge.correct(batch.chosen().text, q).equivalent_or_correct;
        rec.clusters = cluster(batch, equiv);
        try {
            attach_masses(rec.clusters, batch, dedup);
        } catch (const NoProbabilisticMembersError&) {
            continue;  // mass-free questions cannot enter threshold tuning
        }
        out.push_back(std::move(rec));
    }
    return out;
}

TuneOutcome tune_on_split(std::span<const std::pair<Question, SampleBatch>> records,
                          Method method, std::span<const double> grid, double dev_frac,
                          std::uint64_t seed, const Judge& judge, bool dedup) {
    Dataset ds;
    for (const auto& [q, batch] : records) ds.questions.push_back(q);
    const auto [dev, test] = split_dev_test(ds, dev_frac, seed);

    std::set<std::string> dev_ids;
    for (const Question& q : dev.questions) dev_ids.insert(q.id);

    std::vector<TuneRecord> all = make_tune_records(records, judge, dedup);
    std::vector<TuneRecord> dev_records, test_records;
    for (TuneRecord& rec : all) {
        (dev_ids.count(rec.question_id) ? dev_records : test_records).push_back(std::move(rec));
    }

    const TuneResult tuned = tune_threshold(dev_records, method, grid);
    const double at[] = {tuned.tau};
    const TuneResult test_eval = tune_threshold(test_records, method, at);
    return TuneOutcome{tuned.tau, tuned.auroc, test_eval.auroc};
}

}  // namespace calib
