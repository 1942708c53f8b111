#include "acfs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "acfs/special.hpp"

namespace acfs {

double quantile_type7_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 0) throw std::domain_error("quantile: empty sample");
    if (n == 1) return sorted[0];
    const double h = (n - 1) * p;
    const std::size_t i = static_cast<std::size_t>(std::floor(h));
    if (i + 1 >= n) return sorted[n - 1];
    return sorted[i] + (h - i) * (sorted[i + 1] - sorted[i]);
}

double quantile_type7(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    return quantile_type7_sorted(values, p);
}

double median_of(std::vector<double> values) {
    if (values.empty()) throw std::domain_error("median: empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

SummaryStats summarize(const std::vector<double>& values) {
    if (values.empty()) throw std::domain_error("summarize: empty sample");
    SummaryStats s;
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    s.q25 = quantile_type7_sorted(sorted, 0.25);
    s.q75 = quantile_type7_sorted(sorted, 0.75);
    if (n == 1) {
        s.sd = 0.0;
        s.sd_defined = false;
        return s;
    }
    const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : sorted) ss += (v - mean) * (v - mean);
    s.sd = std::sqrt(ss / (n - 1));
    return s;
}

namespace {

struct RankedDiffs {
    std::vector<double> ranks; // of |d|, average ranks on ties
    std::vector<int> signs;
    bool has_ties = false;
};

RankedDiffs rank_abs(const std::vector<double>& nonzero) {
    const std::size_t n = nonzero.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(nonzero[a]) < std::fabs(nonzero[b]);
    });
    RankedDiffs out;
    out.ranks.resize(n);
    out.signs.resize(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n &&
               std::fabs(nonzero[order[j + 1]]) == std::fabs(nonzero[order[i]]))
            ++j;
        const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        if (j > i) out.has_ties = true;
        for (std::size_t k = i; k <= j; ++k) out.ranks[order[k]] = avg;
        i = j + 1;
    }
    for (std::size_t k = 0; k < n; ++k) out.signs[k] = nonzero[k] > 0.0 ? 1 : -1;
    return out;
}

// Exact null distribution of W+ by dynamic programming over doubled ranks
// (average ranks are half-integers, so 2*rank is integral).
double exact_cdf_leq(const std::vector<double>& ranks, double w_plus) {
    long long total2 = 0;
    std::vector<long long> r2(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        r2[i] = llround(2.0 * ranks[i]);
        total2 += r2[i];
    }
    std::vector<double> count(static_cast<std::size_t>(total2) + 1, 0.0);
    count[0] = 1.0;
    long long reach = 0;
    for (long long r : r2) {
        for (long long s = reach; s >= 0; --s)
            if (count[static_cast<std::size_t>(s)] > 0.0)
                count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
        reach += r;
    }
    const double denom = std::ldexp(1.0, static_cast<int>(ranks.size())); // 2^n
    const long long w2 = llround(2.0 * w_plus);
    double acc = 0.0;
    for (long long s = 0; s <= std::min(w2, total2); ++s)
        acc += count[static_cast<std::size_t>(s)];
    return acc / denom;
}

} // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs, Alternative alternative,
                                    WilcoxonMode mode) {
    std::vector<double> nonzero;
    nonzero.reserve(diffs.size());
    for (double d : diffs)
        if (d != 0.0) nonzero.push_back(d);
    WilcoxonResult res;
    res.n_used = static_cast<int>(nonzero.size());
    if (nonzero.empty()) {
        res.degenerate = true;
        res.p = 1.0;
        return res;
    }
    const RankedDiffs rd = rank_abs(nonzero);
    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t i = 0; i < rd.ranks.size(); ++i)
        (rd.signs[i] > 0 ? w_plus : w_minus) += rd.ranks[i];
    res.w_plus = w_plus;
    res.w_minus = w_minus;

    const std::size_t n = nonzero.size();
    bool exact = mode == WilcoxonMode::ForceExact ||
                 (mode == WilcoxonMode::Auto && n <= 12 && !rd.has_ties);
    if (exact) {
        res.exact_path = true;
        const double total = w_plus + w_minus;
        const double p_leq = exact_cdf_leq(rd.ranks, w_plus);
        // P(W+ >= w) = P(W+ <= total - w) by symmetry of the null distribution
        const double p_geq = exact_cdf_leq(rd.ranks, total - w_plus);
        switch (alternative) {
            case Alternative::Less: res.p = p_leq; break;
            case Alternative::Greater: res.p = p_geq; break;
            case Alternative::TwoSided: res.p = std::min(1.0, 2.0 * std::min(p_leq, p_geq)); break;
        }
        return res;
    }

    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    double tie_term = 0.0;
    {
        std::vector<double> absd(nonzero.size());
        for (std::size_t i = 0; i < nonzero.size(); ++i) absd[i] = std::fabs(nonzero[i]);
        std::sort(absd.begin(), absd.end());
        std::size_t i = 0;
        while (i < absd.size()) {
            std::size_t j = i;
            while (j + 1 < absd.size() && absd[j + 1] == absd[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            tie_term += t * t * t - t;
            i = j + 1;
        }
    }
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    if (var <= 0.0) {
        res.degenerate = true;
        res.p = 1.0;
        return res;
    }
    const double sd = std::sqrt(var);
    const double p_less = norm_cdf((w_plus - mean + 0.5) / sd);
    const double p_greater = norm_cdf((mean - w_plus + 0.5) / sd);
    switch (alternative) {
        case Alternative::Less: res.p = p_less; break;
        case Alternative::Greater: res.p = p_greater; break;
        case Alternative::TwoSided: res.p = std::min(1.0, 2.0 * std::min(p_less, p_greater)); break;
    }
    return res;
}

std::vector<double> holm_adjust(const std::vector<double>& p_values) {
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::vector<double> adjusted(m, 0.0);
    double running = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double scaled = static_cast<double>(m - i) * p_values[order[i]];
        running = std::max(running, scaled);
        adjusted[order[i]] = std::min(1.0, running);
    }
    return adjusted;
}

RankBiserialResult rank_biserial(const std::vector<double>& diffs) {
    std::vector<double> nonzero;
    for (double d : diffs)
        if (d != 0.0) nonzero.push_back(d);
    RankBiserialResult res;
    if (nonzero.empty()) {
        res.degenerate = true;
        return res;
    }
    const RankedDiffs rd = rank_abs(nonzero);
    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t i = 0; i < rd.ranks.size(); ++i)
        (rd.signs[i] > 0 ? w_plus : w_minus) += rd.ranks[i];
    res.r = (w_plus - w_minus) / (w_plus + w_minus);
    res.magnitude = std::fabs(res.r);
    return res;
}

double win_rate(const std::vector<double>& diffs) {
    if (diffs.empty()) throw std::domain_error("win_rate: empty sample");
    double wins = 0.0;
    for (double d : diffs) {
        if (d < 0.0) wins += 1.0;
        else if (d == 0.0) wins += 0.5;
    }
    return wins / static_cast<double>(diffs.size());
}

} // namespace acfs
