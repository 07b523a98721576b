#include "calib/llm_client.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace calib {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace

EndpointConfig EndpointConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CalibError("cannot open endpoint config: " + path.string());

    EndpointConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw SchemaViolationError("expected 'key = value'", line_no);
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        try {
            if (key == "base_url") cfg.base_url = value;
            else if (key == "model") cfg.model = value;
            else if (key == "temperature") cfg.temperature = std::stod(value);
            else if (key == "max_in_flight") cfg.max_in_flight = std::stoi(value);
            else if (key == "top_logprobs") cfg.top_logprobs = std::stoi(value);
            else if (key == "retry_attempts") cfg.retry.max_attempts = std::stoi(value);
            else if (key == "retry_backoff_ms") cfg.retry.backoff_base_ms = std::stoi(value);
            else throw SchemaViolationError("unknown endpoint config key '" + key + "'", line_no);
        } catch (const std::invalid_argument&) {
            throw SchemaViolationError("bad value for '" + key + "'", line_no);
        }
    }
    if (cfg.temperature < 0.0) throw CalibError("temperature must be >= 0");
    if (cfg.max_in_flight < 1) throw CalibError("max_in_flight must be >= 1");
    if (const char* key = std::getenv("CALIB_API_KEY")) cfg.api_key = key;
    return cfg;
}

// ---------------------------------------------------------------------------
// Prompt construction
// ---------------------------------------------------------------------------

std::string build_prompt(PromptKind kind, const Question& q, const PromptContext& ctx) {
    auto need_answer = [&] {
        if (ctx.answer.empty())
            throw MissingContextError("second-turn prompt needs the first-turn answer");
    };
    auto need_candidates = [&] {
        if (ctx.candidates.empty())
            throw MissingContextError("candidate-conditioned prompt needs a candidate list");
    };

    switch (kind) {
        case PromptKind::Plain:
            return q.text;

        case PromptKind::Verb:
            return "[Instruction]\n"
                   "You are a knowledgeable assistant. Please answer the following question "
                   "and provide your confidence as a numeric value between 0 and 1 "
                   "(e.g., 0.85 means you are 85% confident).\n"
                   "\n"
                   "[Input]\n"
                   "Question: " + q.text + "\n"
                   "\n"
                   "[Output format]\n"
                   "Answer: {answer}\n"
                   "Confidence: {confidence between 0 and 1, with two-decimal precision}";

        case PromptKind::VerbTopk: {
            const std::string k = std::to_string(ctx.top_k);
            return "[Instruction]\n"
                   "You are a knowledgeable assistant. Please list your top-" + k +
                   " most likely answers to the following question. For each answer, report "
                   "your numeric confidence between 0 and 1 (e.g., 0.85 means 85% confident). "
                   "Use two-decimal precision for all confidence values.\n"
                   "\n"
                   "[Input]\n"
                   "Question: " + q.text + "\n"
                   "\n"
                   "[Output format]\n"
                   "1. Answer: {answer_1}, Confidence: {confidence_1}\n"
                   "2. Answer: {answer_2}, Confidence: {confidence_2}\n"
                   "3. Answer: {answer_3}, Confidence: {confidence_3}\n"
                   "... up to " + k + " answers.";
        }

        case PromptKind::PTrue:
            need_answer();
            return "[Instruction]\n"
                   "You will be given a question and the model's previous answer. "
                   "Please respond with True if the answer is factually correct, or False "
                   "if it is incorrect. Answer strictly with either \"True\" or \"False\" only.\n"
                   "\n"
                   "[Input]\n"
                   "Question: " + q.text + "\n"
                   "Model answer: " + ctx.answer + ".";

        case PromptKind::PTrueCand:
            need_answer();
            need_candidates();
            return "[Instruction]\n"
                   "You will be given a question, the model's answer, and several candidate "
                   "answers. Please respond with True if the model's answer is factually "
                   "correct, or False if it is incorrect. Answer strictly with either "
                   "\"True\" or \"False\" only.\n"
                   "\n"
                   "[Input]\n"
                   "Question: " + q.text + "\n"
                   "Model answer: " + ctx.answer + ".\n"
                   "Candidate answers: " + join(ctx.candidates, ", ") + ".";

        case PromptKind::SelfAsk:
            need_answer();
            return "Question: " + q.text + "\n"
                   "Answer: " + ctx.answer + ".\n"
                   "How confident are you that your answer is correct? "
                   "Please output only a number between 0 and 1 (e.g., 0.85).";

        case PromptKind::SelfAskCand:
            need_answer();
            need_candidates();
            return "Question: " + q.text + "\n"
                   "Candidate answers: " + join(ctx.candidates, ", ") + ".\n"
                   "Considering these candidates, how confident are you that your original "
                   "answer (" + ctx.answer + ") is correct?\n"
                   "Please output only a number between 0 and 1 (e.g., 0.85).";
    }
    throw std::invalid_argument("unknown prompt kind");
}

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

namespace {

struct NumberToken {
    double value = 0.0;
    std::size_t pos = 0;
    bool percent = false;
};

// Plain decimal literals: digits with an optional fractional part, or a bare
// fractional part like ".85". No exponents, no signs.
std::vector<NumberToken> scan_numbers(std::string_view text) {
    std::vector<NumberToken> out;
    const auto is_digit = [&](std::size_t i) {
        return i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])) != 0;
    };
    std::size_t i = 0;
    while (i < text.size()) {
        const bool starts_number = is_digit(i) || (text[i] == '.' && is_digit(i + 1));
        if (!starts_number) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (is_digit(i)) ++i;
        if (i < text.size() && text[i] == '.' && is_digit(i + 1)) {
            ++i;
            while (is_digit(i)) ++i;
        }
        NumberToken tok;
        tok.pos = start;
        tok.value = std::strtod(std::string(text.substr(start, i - start)).c_str(), nullptr);
        std::size_t j = i;
        while (j < text.size() && text[j] == ' ') ++j;
        tok.percent = j < text.size() && text[j] == '%';
        out.push_back(tok);
    }
    return out;
}

// Maps a scanned number to a confidence in [0, 1]: values in (1, 100] are
// percentages; an explicit '%' divides as well.
std::optional<double> usable_confidence(const NumberToken& tok) {
    double v = tok.value;
    if (tok.percent) {
        if (v > 100.0) return std::nullopt;
        return v / 100.0;
    }
    if (v >= 0.0 && v <= 1.0) return v;
    if (v > 1.0 && v <= 100.0) return v / 100.0;
    return std::nullopt;
}

constexpr std::string_view kConfidenceMarkers[] = {"confidence", "confident", "certainty",
                                                   "probability"};

// End positions of every marker occurrence, latest first.
std::vector<std::size_t> marker_ends(const std::string& lowered) {
    std::vector<std::size_t> ends;
    for (std::string_view marker : kConfidenceMarkers) {
        std::size_t pos = lowered.find(marker);
        while (pos != std::string::npos) {
            ends.push_back(pos + marker.size());
            pos = lowered.find(marker, pos + 1);
        }
    }
    std::sort(ends.rbegin(), ends.rend());
    return ends;
}

}  // namespace

std::optional<double> parse_verbalized(std::string_view text) {
    const std::vector<NumberToken> numbers = scan_numbers(text);
    if (numbers.empty()) return std::nullopt;

    // The value announced by the latest confidence marker wins: the first
    // usable number after it, so trailing chatter cannot override it.
    const std::string lowered = to_lower(text);
    for (std::size_t end : marker_ends(lowered)) {
        for (const NumberToken& tok : numbers) {
            if (tok.pos < end) continue;
            if (const auto v = usable_confidence(tok)) return v;
        }
    }
    // Marker-free replies: the last usable number stands.
    for (auto it = numbers.rbegin(); it != numbers.rend(); ++it) {
        if (const auto v = usable_confidence(*it)) return v;
    }
    return std::nullopt;
}

TopkParse parse_topk(std::string_view text, int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    TopkParse result;

    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (static_cast<int>(result.pairs.size()) >= k) break;
        const std::string lowered = to_lower(line);
        const std::size_t answer_pos = lowered.find("answer");
        const std::size_t conf_pos = lowered.find("confidence");
        if (answer_pos == std::string::npos && conf_pos == std::string::npos) continue;

        if (answer_pos == std::string::npos || conf_pos == std::string::npos) {
            ++result.skipped_lines;
            continue;
        }

        // Candidate text: after the separator following "answer", up to the
        // confidence clause (or end of line when confidence comes first).
        std::size_t ans_start = answer_pos + std::string_view("answer").size();
        while (ans_start < line.size() &&
               (line[ans_start] == ':' || line[ans_start] == '=' || line[ans_start] == ' '))
            ++ans_start;
        std::size_t ans_end = conf_pos > answer_pos ? conf_pos : line.size();
        std::string candidate = trim(std::string_view(line).substr(ans_start, ans_end - ans_start));
        while (!candidate.empty() &&
               (candidate.back() == ',' || candidate.back() == ';' || candidate.back() == '|' ||
                candidate.back() == '-' || candidate.back() == '('))
            candidate = trim(std::string_view(candidate).substr(0, candidate.size() - 1));

        // Confidence: first usable number after the confidence marker.
        const std::string_view after_conf =
            std::string_view(line).substr(conf_pos + std::string_view("confidence").size());
        std::optional<double> conf;
        for (const NumberToken& tok : scan_numbers(after_conf)) {
            if ((conf = usable_confidence(tok))) break;
        }
        if (!conf) {
            ++result.skipped_lines;
            continue;
        }
        result.pairs.push_back(AuxCandidate{std::move(candidate), *conf});
    }
    return result;
}

std::optional<bool> parse_true_false(std::string_view text) {
    const std::string lowered = to_lower(text);
    // First alphabetic token.
    std::size_t i = 0;
    while (i < lowered.size() && std::isalpha(static_cast<unsigned char>(lowered[i])) == 0) ++i;
    std::size_t j = i;
    while (j < lowered.size() && std::isalpha(static_cast<unsigned char>(lowered[j])) != 0) ++j;
    const std::string_view first = std::string_view(lowered).substr(i, j - i);
    if (first == "true" || first == "yes") return true;
    if (first == "false" || first == "no") return false;

    // Otherwise the earliest whole-word verdict decides.
    auto find_word = [&](std::string_view word) {
        std::size_t pos = lowered.find(word);
        while (pos != std::string::npos) {
            const bool left_ok =
                pos == 0 || std::isalpha(static_cast<unsigned char>(lowered[pos - 1])) == 0;
            const std::size_t end = pos + word.size();
            const bool right_ok =
                end >= lowered.size() || std::isalpha(static_cast<unsigned char>(lowered[end])) == 0;
            if (left_ok && right_ok) return pos;
            pos = lowered.find(word, pos + 1);
        }
        return std::string::npos;
    };
    const std::size_t t = std::min(find_word("true"), find_word("yes"));
    const std::size_t f = std::min(find_word("false"), find_word("no"));
    if (t == std::string::npos && f == std::string::npos) return std::nullopt;
    if (f == std::string::npos) return true;
    if (t == std::string::npos) return false;
    return t < f;
}

std::string extract_answer_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::string first_non_empty;
    while (std::getline(in, line)) {
        if (first_non_empty.empty()) first_non_empty = trim(line);
        const std::string lowered = to_lower(line);
        const std::size_t pos = lowered.find("answer");
        if (pos == std::string::npos) continue;
        std::size_t start = pos + std::string_view("answer").size();
        if (start >= line.size() || (line[start] != ':' && line[start] != '=')) continue;
        ++start;
        std::size_t end = lowered.find("confidence", start);
        if (end == std::string::npos) end = line.size();
        std::string answer = trim(std::string_view(line).substr(start, end - start));
        while (!answer.empty() && (answer.back() == ',' || answer.back() == ';'))
            answer = trim(std::string_view(answer).substr(0, answer.size() - 1));
        return answer;
    }
    return first_non_empty;
}

// ---------------------------------------------------------------------------
// Rule-based judge
// ---------------------------------------------------------------------------

JudgeVerdict rule_judge_correct(const std::string& answer, const Question& q) {
    const std::string canon = canonical_answer(answer);
    for (const std::string& gt : q.ground_truth) {
        if (canonical_answer(gt) == canon) return {true, JudgeMode::RuleBased};
    }
    return {false, JudgeMode::RuleBased};
}

JudgeVerdict rule_judge_equivalent(const std::string& a, const std::string& b) {
    return {canonical_answer(a) == canonical_answer(b), JudgeMode::RuleBased};
}

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

struct LlmClient::Impl {
    std::string host;         // scheme://authority
    std::string path_prefix;  // optional path part of base_url
};

namespace {

void split_base_url(const std::string& base_url, std::string& host, std::string& prefix) {
    const std::size_t scheme = base_url.find("://");
    if (scheme == std::string::npos)
        throw CalibError("base_url must include a scheme: " + base_url);
    const std::size_t slash = base_url.find('/', scheme + 3);
    if (slash == std::string::npos) {
        host = base_url;
        prefix.clear();
    } else {
        host = base_url.substr(0, slash);
        prefix = base_url.substr(slash);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }
}

int backoff_jitter_ms(int base_ms, int attempt) {
    static thread_local std::mt19937 jitter_rng{std::random_device{}()};
    const double factor = 0.75 + 0.5 * (static_cast<double>(jitter_rng()) /
                                        static_cast<double>(std::mt19937::max()));
    return static_cast<int>(static_cast<double>(base_ms) * std::pow(2.0, attempt) * factor);
}

}  // namespace

LlmClient::LlmClient(EndpointConfig cfg) : cfg_(std::move(cfg)), impl_(std::make_unique<Impl>()) {
    split_base_url(cfg_.base_url, impl_->host, impl_->path_prefix);
}

LlmClient::~LlmClient() = default;

ChatResult LlmClient::chat(const std::string& prompt, int n, bool want_logprobs) {
    ordered_json body;
    body["model"] = cfg_.model;
    body["messages"] = ordered_json::array({{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = cfg_.temperature;
    body["n"] = n;
    body["logprobs"] = want_logprobs;
    if (want_logprobs && cfg_.top_logprobs > 0) body["top_logprobs"] = cfg_.top_logprobs;

    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

    const std::string path = impl_->path_prefix + "/chat/completions";
    const std::string payload = body.dump();

    std::string failure;
    for (int attempt = 0; attempt < cfg_.retry.max_attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(
                backoff_jitter_ms(cfg_.retry.backoff_base_ms, attempt - 1)));
        }
        httplib::Client client(impl_->host);
        client.set_read_timeout(120, 0);
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            failure = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500 || res->status == 429) {
            failure = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw TransportError("chat/completions returned HTTP " + std::to_string(res->status) +
                                 ": " + res->body);

        ordered_json reply;
        try {
            reply = ordered_json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("malformed response JSON: ") + e.what());
        }

        ChatResult result;
        result.retries = attempt;
        if (!reply.contains("choices") || !reply["choices"].is_array())
            throw TransportError("response has no choices array");

        std::vector<std::pair<int, ChatChoice>> indexed;
        int fallback_index = 0;
        for (const auto& choice : reply["choices"]) {
            ChatChoice parsed;
            if (choice.contains("message") && choice["message"].contains("content") &&
                choice["message"]["content"].is_string()) {
                parsed.text = choice["message"]["content"].get<std::string>();
            }
            if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
                choice["logprobs"].contains("content") && choice["logprobs"]["content"].is_array()) {
                for (const auto& tok : choice["logprobs"]["content"]) {
                    TokenProb t;
                    t.token = tok.value("token", std::string{});
                    t.logprob = tok.value("logprob", 0.0);
                    std::vector<TokenProb> alts;
                    if (tok.contains("top_logprobs") && tok["top_logprobs"].is_array()) {
                        for (const auto& alt : tok["top_logprobs"]) {
                            alts.push_back(TokenProb{alt.value("token", std::string{}),
                                                     alt.value("logprob", 0.0)});
                        }
                    }
                    parsed.tokens.push_back(std::move(t));
                    parsed.top_alternatives.push_back(std::move(alts));
                }
            }
            const int index = choice.value("index", fallback_index);
            indexed.emplace_back(index, std::move(parsed));
            ++fallback_index;
        }
        std::stable_sort(indexed.begin(), indexed.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [index, parsed] : indexed) result.choices.push_back(std::move(parsed));
        return result;
    }
    throw TransportError("chat/completions failed after " +
                         std::to_string(cfg_.retry.max_attempts) + " attempts: " + failure);
}

SampleBatch LlmClient::sample_answers(const Question& q, int n, PromptKind elicit) {
    if (n < 1) throw std::invalid_argument("need at least one sample");
    if (elicit != PromptKind::Plain && elicit != PromptKind::Verb && elicit != PromptKind::VerbTopk)
        throw std::invalid_argument("sample_answers supports plain/verb/verb_topk elicitation");

    PromptContext ctx;
    const std::string prompt = build_prompt(elicit, q, ctx);
    const ChatResult result = chat(prompt, n, /*want_logprobs=*/true);

    SampleBatch batch;
    batch.question_id = q.id;
    batch.chosen_index = 0;
    for (const ChatChoice& choice : result.choices) {
        ResponseSample s;
        s.tokens = choice.tokens;
        switch (elicit) {
            case PromptKind::Plain:
                s.text = trim(choice.text);
                break;
            case PromptKind::Verb:
                s.text = extract_answer_text(choice.text);
                s.verbalized_conf = parse_verbalized(choice.text);
                break;
            case PromptKind::VerbTopk: {
                TopkParse parsed = parse_topk(choice.text, ctx.top_k);
                s.aux = std::move(parsed.pairs);
                s.text = s.aux.empty() ? extract_answer_text(choice.text) : s.aux.front().candidate;
                break;
            }
            default:
                break;
        }
        batch.samples.push_back(std::move(s));
    }
    if (batch.samples.empty()) throw TransportError("endpoint returned no choices");
    return batch;
}

SampleBatch sample_answers(const Question& q, int n, const EndpointConfig& cfg) {
    LlmClient client(cfg);
    return client.sample_answers(q, n);
}

// ---------------------------------------------------------------------------
// Remote judge
// ---------------------------------------------------------------------------

RemoteJudge::RemoteJudge(LlmClient& client, std::filesystem::path cache_path)
    : client_(client), cache_path_(std::move(cache_path)) {
    std::ifstream in(cache_path_);
    if (!in) return;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const ordered_json obj = ordered_json::parse(line);
            const auto key = std::stoull(obj.at("key_hash").get<std::string>(), nullptr, 16);
            cache_[key] = obj.at("verdict").get<bool>();
        } catch (const std::exception&) {
            throw SchemaViolationError("bad judge cache entry", line_no);
        }
    }
}

bool RemoteJudge::cached_query(std::uint64_t key, const std::string& prompt) {
    {
        std::lock_guard lock(mutex_);
        const auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    const ChatResult result = client_.chat(prompt, 1, /*want_logprobs=*/false);
    const bool verdict =
        !result.choices.empty() && parse_true_false(result.choices.front().text).value_or(false);

    std::lock_guard lock(mutex_);
    const auto [it, fresh] = cache_.emplace(key, verdict);
    if (fresh) {
        if (cache_path_.has_parent_path())
            std::filesystem::create_directories(cache_path_.parent_path());
        std::ofstream out(cache_path_, std::ios::app);
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(key));
        ordered_json obj;
        obj["key_hash"] = std::string(buf);
        obj["verdict"] = verdict;
        out << obj.dump() << "\n";
    }
    return it->second;
}

JudgeVerdict RemoteJudge::judge_correct(const std::string& answer, const Question& q) {
    std::string gt;
    for (const std::string& g : q.ground_truth) gt += g + "; ";
    const std::uint64_t key = fnv1a64("correct\x1f" + client_.config().model + "\x1f" + q.id +
                                      "\x1f" + q.text + "\x1f" + gt + "\x1f" +
                                      canonical_answer(answer));

    std::vector<std::string> refs(q.ground_truth.begin(), q.ground_truth.end());
    const std::string prompt =
        "You will be given a question, a candidate answer, and the reference answers. "
        "Respond with True if the candidate answer matches any reference answer, or False "
        "if it does not. Answer strictly with either \"True\" or \"False\" only.\n"
        "Question: " + q.text + "\n"
        "Candidate answer: " + answer + "\n"
        "Reference answers: " + join(refs, "; ");
    return {cached_query(key, prompt), JudgeMode::Remote};
}

JudgeVerdict RemoteJudge::judge_equivalent(const std::string& a, const std::string& b) {
    std::string ca = canonical_answer(a), cb = canonical_answer(b);
    if (cb < ca) std::swap(ca, cb);  // symmetric: one cache entry per pair
    const std::uint64_t key =
        fnv1a64("equiv\x1f" + client_.config().model + "\x1f" + ca + "\x1f" + cb);

    const std::string prompt =
        "You will be given two answers to the same question. Respond with True if they "
        "express the same answer, or False if they do not. Answer strictly with either "
        "\"True\" or \"False\" only.\n"
        "Answer 1: " + a + "\n"
        "Answer 2: " + b;
    return {cached_query(key, prompt), JudgeMode::Remote};
}

JudgeVerdict Judge::correct(const std::string& answer, const Question& q) const {
    if (mode == JudgeMode::RuleBased) return rule_judge_correct(answer, q);
    if (!remote) throw CalibError("remote judge not configured");
    return remote->judge_correct(answer, q);
}

JudgeVerdict Judge::equivalent(const std::string& a, const std::string& b) const {
    if (mode == JudgeMode::RuleBased) return rule_judge_equivalent(a, b);
    if (!remote) throw CalibError("remote judge not configured");
    return remote->judge_equivalent(a, b);
}

}  // namespace calib
