#include "calib/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "calib/estimators.hpp"

namespace calib {

namespace {

// Average ranks (1-based), ties share the mean of their rank range.
std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double auroc(std::span<const double> scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("scores and labels must have equal length");
    std::size_t n_pos = 0;
    for (bool l : labels) n_pos += l ? 1 : 0;
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DegenerateLabelsError{};

    const std::vector<double> ranks = average_ranks(scores);
    double rank_sum_pos = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i]) rank_sum_pos += ranks[i];
    }
    const double u = rank_sum_pos -
                     static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auroc(std::span<const EvalRecord> records) {
    std::vector<double> scores;
    std::vector<bool> labels;
    scores.reserve(records.size());
    labels.reserve(records.size());
    for (const EvalRecord& r : records) {
        scores.push_back(r.rank_score);
        labels.push_back(r.correct);
    }
    return auroc(scores, labels);
}

double ece(std::span<const EvalRecord> records, int bins) {
    if (records.empty()) throw std::invalid_argument("ece needs at least one record");
    if (bins < 1) throw std::invalid_argument("ece needs at least one bin");

    std::vector<std::size_t> count(bins, 0), correct(bins, 0);
    std::vector<double> conf_sum(bins, 0.0);
    for (const EvalRecord& r : records) {
        const double c = std::min(1.0, std::max(0.0, r.confidence));
        int b = static_cast<int>(std::ceil(c * bins)) - 1;  // right-closed bins
        b = std::min(bins - 1, std::max(0, b));
        ++count[b];
        conf_sum[b] += c;
        correct[b] += r.correct ? 1 : 0;
    }

    const double n = static_cast<double>(records.size());
    double total = 0.0;
    for (int b = 0; b < bins; ++b) {
        if (count[b] == 0) continue;
        const double nb = static_cast<double>(count[b]);
        const double acc = static_cast<double>(correct[b]) / nb;
        const double conf = conf_sum[b] / nb;
        total += (nb / n) * std::abs(acc - conf);
    }
    return total;
}

double accuracy(std::span<const EvalRecord> records) {
    if (records.empty()) throw std::invalid_argument("accuracy needs at least one record");
    std::size_t correct = 0;
    for (const EvalRecord& r : records) correct += r.correct ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(records.size());
}

double mean_confidence(std::span<const EvalRecord> records) {
    if (records.empty()) throw std::invalid_argument("mean_confidence needs at least one record");
    double sum = 0.0;
    for (const EvalRecord& r : records) sum += r.confidence;
    return sum / static_cast<double>(records.size());
}

int knowledge_coverage(const ClusterSet& cs, double tau) {
    int count = 0;
    for (const Cluster& c : cs.clusters) {
        if (c.mass > tau) ++count;
    }
    return count;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman needs equal-length inputs");
    if (x.size() < 2) throw std::invalid_argument("spearman needs at least two points");

    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    const double n = static_cast<double>(x.size());

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = rx[i] - mx, dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0))
        throw std::invalid_argument("spearman undefined for constant input");
    return sxy / std::sqrt(sxx * syy);
}

bool PoolSpec::contains(int answer_count) const {
    return std::find(answer_counts.begin(), answer_counts.end(), answer_count) !=
           answer_counts.end();
}

std::string PoolSpec::label() const {
    std::string out = "[";
    for (std::size_t i = 0; i < answer_counts.size(); ++i) {
        if (i > 0) out += ",";
        out += std::to_string(answer_counts[i]);
    }
    return out + "]";
}

PoolSpec PoolSpec::parse(std::string_view text) {
    PoolSpec pool;
    std::string token;
    std::istringstream in{std::string(text)};
    while (std::getline(in, token, ',')) {
        std::size_t pos = 0;
        const int v = std::stoi(token, &pos);
        if (v != 1 && v != 2 && v != 4 && v != 6)
            throw std::invalid_argument("pool cardinalities must be in {1,2,4,6}");
        pool.answer_counts.push_back(v);
    }
    if (pool.answer_counts.empty()) throw std::invalid_argument("empty pool spec");
    if (!std::is_sorted(pool.answer_counts.begin(), pool.answer_counts.end()) ||
        std::adjacent_find(pool.answer_counts.begin(), pool.answer_counts.end()) !=
            pool.answer_counts.end())
        throw std::invalid_argument("pool cardinalities must be strictly ascending");
    return pool;
}

std::vector<PoolSpec> PoolSpec::parse_list(std::string_view text) {
    std::vector<PoolSpec> pools;
    std::string token;
    std::istringstream in{std::string(text)};
    while (std::getline(in, token, ';')) pools.push_back(PoolSpec::parse(token));
    if (pools.empty()) throw std::invalid_argument("empty pool list");
    return pools;
}

std::vector<MetricRow> evaluate_pool(std::span<const EvalRecord> records, const PoolSpec& pool,
                                     Method method,
                                     const std::map<Domain, std::size_t>& parse_failures) {
    std::map<Domain, std::vector<EvalRecord>> per_domain;
    for (const EvalRecord& r : records) {
        if (r.method != method || !pool.contains(r.answer_count)) continue;
        per_domain[r.domain].push_back(r);
    }

    std::vector<MetricRow> rows;
    double acc_sum = 0.0, conf_sum = 0.0, ece_sum = 0.0, auroc_sum = 0.0;
    std::size_t n_domains = 0, n_auroc = 0, total_n = 0, total_failures = 0;

    for (const auto& [domain, recs] : per_domain) {
        MetricRow row;
        row.domain = domain;
        row.method = method;
        row.pool = pool;
        row.n = recs.size();
        row.accuracy = accuracy(recs);
        row.mean_confidence = mean_confidence(recs);
        row.ece = ece(recs);
        try {
            row.auroc = auroc(recs);
        } catch (const DegenerateLabelsError&) {
            row.auroc = std::nullopt;  // reported as missing, not fatal
        }
        auto it = parse_failures.find(domain);
        row.parse_failures = it == parse_failures.end() ? 0 : it->second;

        acc_sum += row.accuracy;
        conf_sum += row.mean_confidence;
        ece_sum += row.ece;
        if (row.auroc) {
            auroc_sum += *row.auroc;
            ++n_auroc;
        }
        ++n_domains;
        total_n += row.n;
        total_failures += row.parse_failures;
        rows.push_back(std::move(row));
    }

    if (n_domains > 0) {
        MetricRow macro;
        macro.domain = std::nullopt;
        macro.method = method;
        macro.pool = pool;
        macro.n = total_n;
        macro.accuracy = acc_sum / static_cast<double>(n_domains);
        macro.mean_confidence = conf_sum / static_cast<double>(n_domains);
        macro.ece = ece_sum / static_cast<double>(n_domains);
        if (n_auroc > 0) macro.auroc = auroc_sum / static_cast<double>(n_auroc);
        macro.parse_failures = total_failures;
        rows.push_back(std::move(macro));
    }
    return rows;
}

std::vector<double> make_default_tau_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(static_cast<double>(i) * 0.05);
    return grid;
}

TuneResult tune_threshold(std::span<const TuneRecord> records, Method method,
                          std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("tau grid must be non-empty");
    if (method != Method::Sca && method != Method::Snca && method != Method::Sfca)
        throw std::invalid_argument("tune_threshold supports sca/snca/sfca only");
    if (records.empty()) throw std::invalid_argument("no records to tune on");

    auto estimate = [&](const ClusterSet& cs, double tau) {
        switch (method) {
            case Method::Sca: return sca(cs, tau);
            case Method::Snca: return snca(cs, tau);
            default: return sfca(cs, tau);
        }
    };

    auto macro_auroc = [&](double tau) {
        std::map<Domain, std::pair<std::vector<double>, std::vector<bool>>> per_domain;
        for (const TuneRecord& r : records) {
            auto& [scores, labels] = per_domain[r.domain];
            scores.push_back(rank_score(estimate(r.clusters, tau)));
            labels.push_back(r.correct);
        }
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& [domain, data] : per_domain) {
            try {
                sum += auroc(data.first, data.second);
                ++n;
            } catch (const DegenerateLabelsError&) {
                // skipped: this domain has a single label class
            }
        }
        if (n == 0) throw DegenerateLabelsError("all domains degenerate during tuning");
        return sum / static_cast<double>(n);
    };

    TuneResult best{grid[0], macro_auroc(grid[0])};
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double a = macro_auroc(grid[i]);
        if (a > best.auroc) best = TuneResult{grid[i], a};  // ties keep the smaller tau
    }
    return best;
}

}  // namespace calib
