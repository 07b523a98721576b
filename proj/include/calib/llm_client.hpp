#pragma once
// Client for an OpenAI-compatible chat endpoint: response sampling with
// token logprobs, prompt construction for every elicitation method,
// response parsing, and the pluggable correctness/equivalence judge.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "calib/core.hpp"

namespace calib {

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_base_ms = 1000;  // doubled per retry, jittered
};

struct EndpointConfig {
    std::string base_url;  // e.g. http://127.0.0.1:8080/v1
    std::string model;
    std::string api_key;  // read from CALIB_API_KEY, never from the config file
    double temperature = 1.0;
    int max_in_flight = 4;
    int top_logprobs = 0;  // per-token alternatives, needed by p_true_prob
    RetryPolicy retry;

    // key = value lines; '#' comments. Reads CALIB_API_KEY from the
    // environment.
    static EndpointConfig from_file(const std::filesystem::path& path);
};

// ---------------------------------------------------------------------------
// Prompt construction
// ---------------------------------------------------------------------------

enum class PromptKind { Plain, Verb, VerbTopk, PTrue, PTrueCand, SelfAsk, SelfAskCand };

struct PromptContext {
    std::string answer;                   // first-turn answer, for second-turn prompts
    std::vector<std::string> candidates;  // candidate answers for -Cand variants
    int top_k = 3;
};

// Pure function of (kind, question, context). Second-turn prompts throw
// MissingContextError when the first-turn answer (or the candidate list for
// -Cand variants) is absent.
std::string build_prompt(PromptKind kind, const Question& q, const PromptContext& ctx = {});

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

// Extracts a confidence value from free-form text: the last usable number
// after a confidence marker, else the last usable number anywhere. Values in
// (1, 100] are read as percentages. Returns nullopt when nothing parses; the
// caller records the sample as missing for that method.
std::optional<double> parse_verbalized(std::string_view text);

struct TopkParse {
    std::vector<AuxCandidate> pairs;  // in listed order, at most k
    int skipped_lines = 0;            // malformed candidate lines
};

// Parses "Answer: ..., Confidence: ..." style lines, tolerating reordered
// fields and list numbering. An empty pair list means the parse failed.
TopkParse parse_topk(std::string_view text, int k);

// True/False (or yes/no) verdict from a self-verification reply.
std::optional<bool> parse_true_false(std::string_view text);

// The answer part of a structured reply: text after an "Answer:" marker with
// any same-line confidence clause removed, else the first non-empty line.
std::string extract_answer_text(std::string_view text);

// ---------------------------------------------------------------------------
// Judge
// ---------------------------------------------------------------------------

enum class JudgeMode { RuleBased, Remote };

struct JudgeVerdict {
    bool equivalent_or_correct = false;
    JudgeMode source = JudgeMode::RuleBased;
};

// Canonical-text matching; never fails.
JudgeVerdict rule_judge_correct(const std::string& answer, const Question& q);
JudgeVerdict rule_judge_equivalent(const std::string& a, const std::string& b);

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

struct ChatChoice {
    std::string text;
    std::vector<TokenProb> tokens;                       // generated-token logprobs
    std::vector<std::vector<TokenProb>> top_alternatives;  // per token, when requested
};

struct ChatResult {
    std::vector<ChatChoice> choices;
    int retries = 0;
};

class LlmClient {
  public:
    explicit LlmClient(EndpointConfig cfg);
    ~LlmClient();

    LlmClient(const LlmClient&) = delete;
    LlmClient& operator=(const LlmClient&) = delete;

    // POST {base_url}/chat/completions. Retries transport failures and 5xx
    // with exponential backoff; throws TransportError once attempts are
    // exhausted.
    ChatResult chat(const std::string& prompt, int n, bool want_logprobs = true);

    // n sampled answers for a question. Samples carry token logprobs when
    // the endpoint supplies them; elicitation kinds fill verbalized_conf
    // (Verb) or aux candidates (VerbTopk) by parsing each response.
    // chosen_index is 0: the first sample is the primary answer.
    SampleBatch sample_answers(const Question& q, int n, PromptKind elicit = PromptKind::Plain);

    const EndpointConfig& config() const { return cfg_; }

  private:
    EndpointConfig cfg_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Free-function form of the sampling entry point.
SampleBatch sample_answers(const Question& q, int n, const EndpointConfig& cfg);

// ---------------------------------------------------------------------------
// Remote judge with mandatory caching
// ---------------------------------------------------------------------------

// Judge cache: JSON Lines of {"key_hash", "verdict"}; loaded on open,
// appended on every fresh verdict. Two identical judge calls issue exactly
// one network request.
class RemoteJudge {
  public:
    RemoteJudge(LlmClient& client, std::filesystem::path cache_path);

    JudgeVerdict judge_correct(const std::string& answer, const Question& q);
    JudgeVerdict judge_equivalent(const std::string& a, const std::string& b);

    std::size_t cache_size() const { return cache_.size(); }

  private:
    bool cached_query(std::uint64_t key, const std::string& prompt);

    LlmClient& client_;
    std::filesystem::path cache_path_;
    std::map<std::uint64_t, bool> cache_;
    std::mutex mutex_;
};

// Dispatches to the rule-based judge or a remote judge, depending on mode.
struct Judge {
    JudgeMode mode = JudgeMode::RuleBased;
    RemoteJudge* remote = nullptr;  // required when mode == Remote

    JudgeVerdict correct(const std::string& answer, const Question& q) const;
    JudgeVerdict equivalent(const std::string& a, const std::string& b) const;
};

}  // namespace calib
