#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "radgame/analytics/analytics.hpp"
#include "radgame/core/error.hpp"

namespace radgame {

namespace {

struct Ranked {
    std::vector<long> doubled;  // 2 * mid-rank, always an integer
    double tie_term = 0.0;      // sum of t^3 - t over tie groups
};

Ranked doubled_midranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    Ranked out;
    out.doubled.assign(n, 0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // ranks i+1 .. j+1, mid-rank (i + j + 2) / 2
        const long twice = static_cast<long>(i + j + 2);
        for (std::size_t k = i; k <= j; ++k) out.doubled[order[k]] = twice;
        const double t = static_cast<double>(j - i + 1);
        out.tie_term += t * t * t - t;
        i = j + 1;
    }
    return out;
}

double upper_normal(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }
double lower_normal(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double two_sided(double lower, double upper) { return std::min(1.0, 2.0 * std::min(lower, upper)); }

double clamp_p(double p) { return std::clamp(p, std::numeric_limits<double>::min(), 1.0); }

void require_finite(const std::vector<double>& v, const char* name) {
    for (double x : v) {
        if (!std::isfinite(x)) throw Error(ErrorCode::invalid_argument, std::string(name) + " contains a non-finite value");
    }
}

}  // namespace

StatResult mann_whitney_u(const std::vector<double>& x, const std::vector<double>& y, Sidedness sidedness,
                          std::size_t exact_limit) {
    if (x.empty() || y.empty()) throw Error(ErrorCode::empty_sample, "mann_whitney_u needs two non-empty samples");
    require_finite(x, "x");
    require_finite(y, "y");
    const std::size_t m = x.size(), n = y.size(), N = m + n;

    long u2 = 0;  // 2U
    for (double a : x) {
        for (double b : y) u2 += a > b ? 2 : (a == b ? 1 : 0);
    }

    StatResult r;
    r.test = "mann_whitney_u";
    r.statistic = static_cast<double>(u2) / 2.0;
    r.sidedness = sidedness;
    r.n_x = m;
    r.n_y = n;

    std::vector<double> pooled(x);
    pooled.insert(pooled.end(), y.begin(), y.end());
    const Ranked ranked = doubled_midranks(pooled);

    double lower = 1.0, upper = 1.0;
    if (N <= exact_limit) {
        r.method = TestMethod::exact;
        // ways[k][s]: subsets of size k with doubled rank sum s
        const long max_sum = std::accumulate(ranked.doubled.begin(), ranked.doubled.end(), 0L);
        std::vector<std::vector<double>> ways(m + 1, std::vector<double>(max_sum + 1, 0.0));
        ways[0][0] = 1.0;
        for (long rank : ranked.doubled) {
            for (std::size_t k = m; k >= 1; --k) {
                for (long s = max_sum; s >= rank; --s) ways[k][s] += ways[k - 1][s - rank];
            }
        }
        // 2U = 2R - m(m+1)
        const long offset = static_cast<long>(m * (m + 1));
        double total = 0, le = 0, ge = 0;
        for (long s = 0; s <= max_sum; ++s) {
            const double w = ways[m][s];
            if (w == 0) continue;
            const long candidate = s - offset;
            total += w;
            if (candidate <= u2) le += w;
            if (candidate >= u2) ge += w;
        }
        lower = le / total;
        upper = ge / total;
    } else {
        r.method = TestMethod::normal_approx;
        const double mu = static_cast<double>(m) * n / 2.0;
        const double Nd = static_cast<double>(N);
        const double var = static_cast<double>(m) * n / 12.0 * ((Nd + 1) - ranked.tie_term / (Nd * (Nd - 1)));
        if (var > 0) {
            const double sd = std::sqrt(var);
            const double u = r.statistic;
            upper = std::min(1.0, upper_normal((u - mu - 0.5) / sd));
            lower = std::min(1.0, lower_normal((u - mu + 0.5) / sd));
        }
    }
    r.p_value = clamp_p(sidedness == Sidedness::one ? upper : two_sided(lower, upper));
    return r;
}

StatResult wilcoxon_signed_rank(const std::vector<double>& pre, const std::vector<double>& post, Sidedness sidedness,
                                std::size_t exact_limit) {
    if (pre.size() != post.size()) {
        throw Error(ErrorCode::length_mismatch, "wilcoxon_signed_rank needs paired samples",
                    std::to_string(pre.size()) + " vs " + std::to_string(post.size()));
    }
    if (pre.empty()) throw Error(ErrorCode::empty_sample, "wilcoxon_signed_rank needs at least one pair");
    require_finite(pre, "pre");
    require_finite(post, "post");

    std::vector<double> magnitude;
    std::vector<bool> positive;
    for (std::size_t i = 0; i < pre.size(); ++i) {
        const double d = post[i] - pre[i];
        if (d == 0) continue;
        magnitude.push_back(std::fabs(d));
        positive.push_back(d > 0);
    }
    if (magnitude.empty()) throw Error(ErrorCode::degenerate, "all paired differences are zero");

    const Ranked ranked = doubled_midranks(magnitude);
    const std::size_t n = magnitude.size();
    long w2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (positive[i]) w2 += ranked.doubled[i];
    }

    StatResult r;
    r.test = "wilcoxon_signed_rank";
    r.statistic = static_cast<double>(w2) / 2.0;
    r.sidedness = sidedness;
    r.n_x = n;
    r.n_y = n;

    double lower = 1.0, upper = 1.0;
    if (n <= exact_limit) {
        r.method = TestMethod::exact;
        const long max_sum = std::accumulate(ranked.doubled.begin(), ranked.doubled.end(), 0L);
        std::vector<double> ways(max_sum + 1, 0.0);
        ways[0] = 1.0;
        for (long rank : ranked.doubled) {
            for (long s = max_sum; s >= rank; --s) ways[s] += ways[s - rank];
        }
        double total = 0, le = 0, ge = 0;
        for (long s = 0; s <= max_sum; ++s) {
            total += ways[s];
            if (s <= w2) le += ways[s];
            if (s >= w2) ge += ways[s];
        }
        lower = le / total;
        upper = ge / total;
    } else {
        r.method = TestMethod::normal_approx;
        const double nd = static_cast<double>(n);
        const double mu = nd * (nd + 1) / 4.0;
        const double var = nd * (nd + 1) * (2 * nd + 1) / 24.0 - ranked.tie_term / 48.0;
        if (var > 0) {
            const double sd = std::sqrt(var);
            upper = std::min(1.0, upper_normal((r.statistic - mu - 0.5) / sd));
            lower = std::min(1.0, lower_normal((r.statistic - mu + 0.5) / sd));
        }
    }
    r.p_value = clamp_p(sidedness == Sidedness::one ? upper : two_sided(lower, upper));
    return r;
}

}  // namespace radgame
