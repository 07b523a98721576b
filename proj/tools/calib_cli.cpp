// Command-line surface for the calibration pipeline:
//   generate -> sample -> score -> evaluate / tune
// Stages communicate only through the documented JSON Lines schemas, so any
// stage can be replaced by external tooling.

#include <cstdio>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "calib/clustering.hpp"
#include "calib/dataset.hpp"
#include "calib/llm_client.hpp"
#include "calib/metrics.hpp"
#include "calib/pipeline.hpp"
#include "calib/simulator.hpp"

namespace {

using namespace calib;

constexpr int kExitSchema = 2;
constexpr int kExitTransport = 3;
constexpr int kExitDegenerate = 4;

std::vector<Method> parse_methods(const std::string& arg) {
    if (arg == "all" || arg.empty()) return {};
    std::vector<Method> methods;
    std::istringstream in(arg);
    std::string token;
    while (std::getline(in, token, ',')) methods.push_back(method_from_string(token));
    return methods;
}

std::vector<double> parse_grid(const std::string& arg) {
    if (arg.empty()) return make_default_tau_grid();
    std::vector<double> grid;
    std::istringstream in(arg);
    std::string token;
    while (std::getline(in, token, ',')) grid.push_back(std::stod(token));
    return grid;
}

void cmd_generate(bool math, bool synthetic, const std::string& spec_path,
                  const std::string& out_dir, std::uint64_t seed, std::size_t per_setting) {
    const std::filesystem::path out(out_dir);
    if (math == synthetic)
        throw std::invalid_argument("--math or --synthetic (exactly one) is required");

    if (math) {
        const Dataset ds = generate_math_dataset(per_setting, seed);
        store_dataset(ds, out / "dataset.jsonl");
        std::printf("wrote %zu questions to %s\n", ds.questions.size(),
                    (out / "dataset.jsonl").c_str());
        return;
    }

    BenchmarkSpec spec;
    if (!spec_path.empty()) {
        spec = BenchmarkSpec::from_file(spec_path);
    } else {
        spec.profiles = BenchmarkSpec::default_profiles();
    }
    const SynthBenchmark bench = synth_benchmark(spec, seed);
    store_dataset(bench.dataset, out / "dataset.jsonl");
    store_samples(bench.batches, out / "samples.jsonl");
    std::printf("wrote %zu questions and %zu sample batches to %s\n",
                bench.dataset.questions.size(), bench.batches.size(), out.c_str());
}

void cmd_sample(const std::string& dataset_path, const std::string& config_path, int n,
                const std::string& elicit, const std::string& second_turn_methods,
                const std::string& out_path, const std::string& second_out_path) {
    const Dataset ds = load_dataset(dataset_path);
    EndpointConfig cfg = EndpointConfig::from_file(config_path);
    LlmClient client(cfg);

    PromptKind kind = PromptKind::Plain;
    if (elicit == "verb") kind = PromptKind::Verb;
    else if (elicit == "topk") kind = PromptKind::VerbTopk;
    else if (elicit != "plain") throw std::invalid_argument("--elicit must be plain|verb|topk");

    // Resumable: question ids already present in the output are skipped.
    std::set<std::string> done;
    std::vector<SampleBatch> batches;
    if (std::filesystem::exists(out_path)) {
        batches = load_samples(out_path);
        for (const SampleBatch& b : batches) done.insert(b.question_id);
        std::fprintf(stderr, "resuming: %zu questions already sampled\n", done.size());
    }

    const std::vector<Method> second = parse_methods(second_turn_methods);
    SecondTurnMap turns;
    if (!second.empty() && std::filesystem::exists(second_out_path))
        turns = load_second_turns(second_out_path);

    for (const Question& q : ds.questions) {
        if (done.count(q.id)) continue;
        SampleBatch batch = client.sample_answers(q, n, kind);
        batch.question_id = q.id;

        if (!second.empty()) {
            // Candidates: top cluster representatives by mass (up to 3).
            ClusterSet cs = cluster(batch, rule_based_equivalence());
            std::vector<std::string> candidates;
            try {
                attach_masses(cs, batch);
                std::vector<const Cluster*> order;
                for (const Cluster& c : cs.clusters) order.push_back(&c);
                std::sort(order.begin(), order.end(), [](const Cluster* a, const Cluster* b) {
                    return a->mass != b->mass ? a->mass > b->mass
                                              : a->representative < b->representative;
                });
                for (std::size_t i = 0; i < order.size() && i < 3; ++i)
                    candidates.push_back(order[i]->representative);
            } catch (const NoProbabilisticMembersError&) {
                for (std::size_t i = 0; i < cs.clusters.size() && i < 3; ++i)
                    candidates.push_back(cs.clusters[i].representative);
            }

            PromptContext ctx;
            ctx.answer = batch.chosen().text;
            ctx.candidates = candidates;
            for (Method m : second) {
                SecondTurn turn;
                switch (m) {
                    case Method::PTrueConsis:
                    case Method::PTrueConsisCand: {
                        const bool cand = m == Method::PTrueConsisCand;
                        const std::string prompt =
                            build_prompt(cand ? PromptKind::PTrueCand : PromptKind::PTrue, q, ctx);
                        const ChatResult res = client.chat(prompt, n, false);
                        for (const ChatChoice& c : res.choices) turn.texts.push_back(c.text);
                        break;
                    }
                    case Method::PTrueProb:
                    case Method::PTrueProbCand: {
                        const bool cand = m == Method::PTrueProbCand;
                        const std::string prompt =
                            build_prompt(cand ? PromptKind::PTrueCand : PromptKind::PTrue, q, ctx);
                        const ChatResult res = client.chat(prompt, 1, true);
                        if (!res.choices.empty()) {
                            turn.texts.push_back(res.choices.front().text);
                            if (!res.choices.front().top_alternatives.empty())
                                turn.top_logprobs = res.choices.front().top_alternatives.front();
                        }
                        break;
                    }
                    case Method::SelfAsk:
                    case Method::SelfAskCand: {
                        const bool cand = m == Method::SelfAskCand;
                        const std::string prompt = build_prompt(
                            cand ? PromptKind::SelfAskCand : PromptKind::SelfAsk, q, ctx);
                        const ChatResult res = client.chat(prompt, 1, false);
                        if (!res.choices.empty()) turn.texts.push_back(res.choices.front().text);
                        break;
                    }
                    default:
                        throw std::invalid_argument("--second-turn accepts p_true_*/self_ask* only");
                }
                turns[{q.id, m}] = std::move(turn);
            }
        }

        batches.push_back(std::move(batch));
        store_samples(batches, out_path);  // rewrite after each question: cheap, resumable
        if (!second.empty()) store_second_turns(turns, second_out_path);
    }
    std::printf("sampled %zu questions into %s\n", batches.size(), out_path.c_str());
}

void cmd_score(const std::string& dataset_path, const std::string& samples_path,
               const std::string& second_path, const std::string& methods_arg, double tau,
               bool no_dedup, const std::string& judge_arg, const std::string& cache_path,
               const std::string& endpoint_config, const std::string& out_path,
               const std::string& labels_path, int jobs) {
    const auto records = load_records(dataset_path, samples_path);

    ScoreOptions opts;
    opts.methods = parse_methods(methods_arg);
    opts.estimator.tau = tau;
    opts.estimator.dedup = !no_dedup;
    opts.jobs = jobs;

    std::unique_ptr<LlmClient> client;
    std::unique_ptr<RemoteJudge> remote;
    if (judge_arg == "remote") {
        client = std::make_unique<LlmClient>(EndpointConfig::from_file(endpoint_config));
        remote = std::make_unique<RemoteJudge>(*client, cache_path);
        opts.judge = Judge{JudgeMode::Remote, remote.get()};
    } else if (judge_arg != "rule") {
        throw std::invalid_argument("--judge must be rule|remote");
    }

    SecondTurnMap turns;
    const SecondTurnMap* turns_ptr = nullptr;
    if (!second_path.empty()) {
        turns = load_second_turns(second_path);
        turns_ptr = &turns;
    }

    const auto scores = score_records(records, opts, turns_ptr);
    store_scores(scores, out_path);
    store_labels(scores, labels_path);
    std::printf("scored %zu questions into %s\n", scores.size(), out_path.c_str());
}

void cmd_evaluate(const std::string& scores_path, const std::string& labels_path,
                  const std::string& pools_arg, const std::string& methods_arg,
                  const std::string& csv_path, const std::string& md_path) {
    const LoadedScores loaded = load_scores(scores_path, labels_path);
    const std::vector<PoolSpec> pools = PoolSpec::parse_list(pools_arg);

    std::vector<Method> methods = parse_methods(methods_arg);
    if (methods.empty()) {
        std::set<Method> seen;
        for (const EvalRecord& r : loaded.records) seen.insert(r.method);
        for (const auto& [key, count] : loaded.parse_failures) seen.insert(key.first);
        methods.assign(seen.begin(), seen.end());
    }

    const auto rows = evaluate(loaded, pools, methods);
    if (rows.empty()) throw DegenerateLabelsError("no evaluable records");
    write_report_csv(rows, csv_path);
    if (!md_path.empty()) write_report_markdown(rows, md_path);
    std::printf("wrote %zu report rows to %s\n", rows.size(), csv_path.c_str());
}

void cmd_tune(const std::string& dataset_path, const std::string& samples_path,
              const std::string& method_arg, const std::string& grid_arg, double dev_frac,
              std::uint64_t seed, bool no_dedup) {
    const auto records = load_records(dataset_path, samples_path);
    const Method method = method_from_string(method_arg);
    const std::vector<double> grid = parse_grid(grid_arg);

    const TuneOutcome outcome =
        tune_on_split(records, method, grid, dev_frac, seed, Judge{}, !no_dedup);
    nlohmann::ordered_json obj;
    obj["method"] = method_arg;
    obj["tau"] = outcome.tau;
    obj["dev_auroc"] = outcome.dev_auroc;
    obj["test_auroc"] = outcome.test_auroc;
    std::cout << obj.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"confidence calibration toolkit for multi-answer question answering"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "generate a dataset (math or synthetic)");
    bool gen_math = false, gen_synth = false;
    std::string gen_spec, gen_out = "out";
    std::uint64_t gen_seed = 0;
    std::size_t gen_per_setting = 500;
    generate->add_flag("--math", gen_math, "rule-based math domain");
    generate->add_flag("--synthetic", gen_synth, "synthetic benchmark (dataset + samples)");
    generate->add_option("--spec", gen_spec, "benchmark spec file (synthetic)");
    generate->add_option("--out", gen_out, "output directory")->required();
    generate->add_option("--seed", gen_seed, "generation seed");
    generate->add_option("--per-setting", gen_per_setting,
                         "math questions per answer-count setting");

    // sample
    auto* sample = app.add_subcommand("sample", "sample answers from an endpoint");
    std::string smp_dataset, smp_config, smp_out, smp_second_out = "second_turns.jsonl";
    std::string smp_elicit = "plain", smp_second;
    int smp_n = 10;
    sample->add_option("--dataset", smp_dataset)->required();
    sample->add_option("--config", smp_config, "endpoint config file")->required();
    sample->add_option("--n", smp_n, "samples per question");
    sample->add_option("--elicit", smp_elicit, "plain|verb|topk");
    sample->add_option("--second-turn", smp_second,
                       "comma list of second-turn methods to query");
    sample->add_option("--out", smp_out)->required();
    sample->add_option("--second-out", smp_second_out, "second-turn output file");

    // score
    auto* score = app.add_subcommand("score", "cluster samples and run estimators");
    std::string sc_dataset, sc_samples, sc_second, sc_methods = "all", sc_judge = "rule";
    std::string sc_cache = "judge_cache.jsonl", sc_endpoint, sc_out, sc_labels;
    double sc_tau = 0.1;
    bool sc_no_dedup = false;
    int sc_jobs = 1;
    score->add_option("--dataset", sc_dataset)->required();
    score->add_option("--samples", sc_samples)->required();
    score->add_option("--second-turns", sc_second, "second-turn elicitation file");
    score->add_option("--methods", sc_methods, "comma list or 'all'");
    score->add_option("--tau", sc_tau, "aggregation threshold");
    score->add_flag("--no-dedup", sc_no_dedup, "count duplicate sequences multiply");
    score->add_option("--judge", sc_judge, "rule|remote");
    score->add_option("--judge-cache", sc_cache, "remote judge cache file");
    score->add_option("--endpoint-config", sc_endpoint, "endpoint config (remote judge)");
    score->add_option("--out", sc_out, "scores JSONL")->required();
    score->add_option("--labels-out", sc_labels, "labels JSONL")->required();
    score->add_option("--jobs", sc_jobs, "worker threads");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "metrics over mixed answer-count pools");
    std::string ev_scores, ev_labels, ev_pools = "1;1,2;1,2,4;1,2,4,6";
    std::string ev_methods = "all", ev_csv, ev_md;
    evaluate->add_option("--scores", ev_scores)->required();
    evaluate->add_option("--labels", ev_labels)->required();
    evaluate->add_option("--pools", ev_pools, "semicolon-separated pools");
    evaluate->add_option("--methods", ev_methods, "comma list or 'all'");
    evaluate->add_option("--out", ev_csv, "CSV report path")->required();
    evaluate->add_option("--md", ev_md, "markdown report path");

    // tune
    auto* tune = app.add_subcommand("tune", "tune the aggregation threshold on a dev split");
    std::string tn_dataset, tn_samples, tn_method = "sca", tn_grid;
    double tn_dev_frac = 0.2;
    std::uint64_t tn_seed = 0;
    bool tn_no_dedup = false;
    tune->add_option("--dataset", tn_dataset)->required();
    tune->add_option("--samples", tn_samples)->required();
    tune->add_option("--method", tn_method, "sca|snca|sfca");
    tune->add_option("--grid", tn_grid, "comma list of tau values (default 0..1 step 0.05)");
    tune->add_option("--dev-frac", tn_dev_frac, "dev split fraction");
    tune->add_option("--seed", tn_seed, "split seed");
    tune->add_flag("--no-dedup", tn_no_dedup);

    try {
        app.parse(argc, argv);
        if (generate->parsed())
            cmd_generate(gen_math, gen_synth, gen_spec, gen_out, gen_seed, gen_per_setting);
        else if (sample->parsed())
            cmd_sample(smp_dataset, smp_config, smp_n, smp_elicit, smp_second, smp_out,
                       smp_second_out);
        else if (score->parsed())
            cmd_score(sc_dataset, sc_samples, sc_second, sc_methods, sc_tau, sc_no_dedup,
                      sc_judge, sc_cache, sc_endpoint, sc_out, sc_labels, sc_jobs);
        else if (evaluate->parsed())
            cmd_evaluate(ev_scores, ev_labels, ev_pools, ev_methods, ev_csv, ev_md);
        else if (tune->parsed())
            cmd_tune(tn_dataset, tn_samples, tn_method, tn_grid, tn_dev_frac, tn_seed,
                     tn_no_dedup);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitSchema;
    } catch (const SchemaViolationError& e) {
        std::fprintf(stderr, "schema error: %s\n", e.what());
        return kExitSchema;
    } catch (const TransportError& e) {
        std::fprintf(stderr, "transport error: %s\n", e.what());
        return kExitTransport;
    } catch (const DegenerateLabelsError& e) {
        std::fprintf(stderr, "degenerate metrics: %s\n", e.what());
        return kExitDegenerate;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid argument: %s\n", e.what());
        return kExitSchema;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
