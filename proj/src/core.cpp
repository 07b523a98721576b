#include "calib/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace calib {

namespace {

constexpr std::string_view kDomainNames[] = {
    "Award", "Office", "Region", "Math", "River", "Language", "Synthetic",
};

constexpr std::string_view kMethodIds[] = {
    "prob_entropy", "norm_prob_entropy", "semantic_entropy",
    "verb",         "verb_topk",         "consistency",
    "consis_verb",  "consis_verb_topk",  "perplexity",
    "p_true_consis", "p_true_prob",      "p_true_consis_cand",
    "p_true_prob_cand", "self_ask",      "self_ask_cand",
    "sca",          "snca",              "sfca",
};

}  // namespace

std::string_view to_string(Domain d) {
    return kDomainNames[static_cast<int>(d)];
}

Domain domain_from_string(std::string_view s) {
    for (std::size_t i = 0; i < std::size(kDomainNames); ++i) {
        if (kDomainNames[i] == s) return static_cast<Domain>(i);
    }
    throw std::invalid_argument("unknown domain: " + std::string(s));
}

std::string_view to_string(Method m) {
    return kMethodIds[static_cast<int>(m)];
}

Method method_from_string(std::string_view s) {
    for (std::size_t i = 0; i < std::size(kMethodIds); ++i) {
        if (kMethodIds[i] == s) return static_cast<Method>(i);
    }
    throw std::invalid_argument("unknown method: " + std::string(s));
}

void Question::validate() const {
    if (id.empty()) throw std::invalid_argument("question id must be non-empty");
    if (answer_count != 1 && answer_count != 2 && answer_count != 4 && answer_count != 6)
        throw std::invalid_argument("answer_count must be one of {1,2,4,6}: " + id);
    if (ground_truth.empty()) throw std::invalid_argument("ground_truth must be non-empty: " + id);
    if (static_cast<int>(ground_truth.size()) != answer_count)
        throw std::invalid_argument("|ground_truth| must equal answer_count: " + id);
}

ConfidenceEstimate make_confidence(Method m, double raw) {
    return ConfidenceEstimate{m, raw, Orientation::Confidence,
                              std::min(1.0, std::max(0.0, raw))};
}

ConfidenceEstimate make_uncertainty(Method m, double raw) {
    return ConfidenceEstimate{m, raw, Orientation::Uncertainty,
                              std::min(1.0, std::max(0.0, std::exp(-raw)))};
}

double rank_score(const ConfidenceEstimate& e) {
    return e.orientation == Orientation::Confidence ? e.raw : -e.raw;
}

double sequence_logprob(const ResponseSample& sample) {
    if (sample.tokens.empty()) throw EmptyTokensError{};
    double sum = 0.0;
    for (const TokenProb& t : sample.tokens) sum += t.logprob;
    return sum;
}

double sequence_probability(const ResponseSample& sample) {
    return std::exp(sequence_logprob(sample));
}

std::string canonical_answer(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (begin < end && is_space(text[begin])) ++begin;
    while (end > begin && is_space(text[end - 1])) --end;
    // Terminal punctuation (possibly several, e.g. "Paris.!").
    constexpr std::string_view kTerminal = ".,!?;:";
    while (end > begin && kTerminal.find(text[end - 1]) != std::string_view::npos) --end;
    while (begin < end && is_space(text[end - 1])) --end;

    std::string out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
    }
    return out;
}

}  // namespace calib
