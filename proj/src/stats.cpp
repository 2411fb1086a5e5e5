#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "error.hpp"

namespace qrisk {

std::vector<double> average_ranks(const std::vector<double>& xs) {
    const size_t n = xs.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        // Positions i..j (0-based) share the average of 1-based ranks i+1..j+1.
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || x < 0.0 || x > 1.0) {
        raise(ErrorCode::InvalidArgument, "incomplete beta requires a,b > 0 and x in [0,1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

namespace {

// Two-sided tail of Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df) {
    const double t2 = t * t;
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t2));
}

double rank_correlation(const std::vector<double>& rx, const std::vector<double>& ry,
                        double* sxx_out, double* syy_out, double* mean_out) {
    const size_t n = rx.size();
    const double mean = 0.5 * static_cast<double>(n + 1); // ranks always average (n+1)/2
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx_out) *sxx_out = sxx;
    if (syy_out) *syy_out = syy;
    if (mean_out) *mean_out = mean;
    if (sxx <= 0.0 || syy <= 0.0) {
        raise(ErrorCode::UndefinedCorrelation, "rank correlation undefined for constant input");
    }
    return sxy / std::sqrt(sxx * syy);
}

} // namespace

SpearmanResult spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) {
        raise(ErrorCode::InvalidArgument, "spearman requires equal-length samples");
    }
    const size_t n = xs.size();
    if (n < 4) raise(ErrorCode::InvalidArgument, "spearman requires at least 4 observations");

    const std::vector<double> rx = average_ranks(xs);
    const std::vector<double> ry = average_ranks(ys);
    double sxx = 0.0, syy = 0.0, mean = 0.0;
    SpearmanResult out;
    out.rho = rank_correlation(rx, ry, &sxx, &syy, &mean);

    if (n <= 12) {
        // Exact permutation distribution. Iterating distinct arrangements of
        // the y-rank multiset weights every arrangement equally, because each
        // distinct arrangement stands for the same number of raw index
        // permutations.
        std::vector<double> rxc(n);
        for (size_t i = 0; i < n; ++i) rxc[i] = rx[i] - mean;
        std::vector<double> perm = ry;
        std::sort(perm.begin(), perm.end());
        const double denom = std::sqrt(sxx * syy);
        const double threshold = std::fabs(out.rho) - 1e-12;
        uint64_t hits = 0, total = 0;
        do {
            double sxy = 0.0;
            for (size_t i = 0; i < n; ++i) sxy += rxc[i] * (perm[i] - mean);
            if (std::fabs(sxy / denom) >= threshold) ++hits;
            ++total;
        } while (std::next_permutation(perm.begin(), perm.end()));
        out.exact = true;
        out.hits = hits;
        out.total = total;
        out.p = static_cast<double>(hits) / static_cast<double>(total);
        return out;
    }

    const double rho2 = out.rho * out.rho;
    if (rho2 >= 1.0) {
        out.p = 0.0;
        return out;
    }
    const double df = static_cast<double>(n - 2);
    const double t = out.rho * std::sqrt(df / (1.0 - rho2));
    out.p = student_t_two_sided(t, df);
    return out;
}

namespace {

double u_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0.0;
    for (double av : a) {
        for (double bv : b) {
            if (av > bv) u += 1.0;
            else if (av == bv) u += 0.5;
        }
    }
    return u;
}

bool pooled_has_ties(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pool = a;
    pool.insert(pool.end(), b.begin(), b.end());
    std::sort(pool.begin(), pool.end());
    return std::adjacent_find(pool.begin(), pool.end()) != pool.end();
}

double binomial(uint32_t n, uint32_t k) {
    double r = 1.0;
    for (uint32_t i = 1; i <= k; ++i) {
        r *= static_cast<double>(n - k + i);
        r /= static_cast<double>(i);
    }
    return r;
}

} // namespace

MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    const size_t n = a.size();
    const size_t m = b.size();
    if (n == 0 || m == 0) {
        raise(ErrorCode::InvalidArgument, "mann_whitney_u requires non-empty samples");
    }

    MannWhitneyResult out;
    out.U = u_statistic(a, b);
    const bool ties = pooled_has_ties(a, b);
    const size_t total_count = n + m;

    if (ties && total_count <= 12) {
        // Enumerate every assignment of group labels to the pooled values.
        std::vector<double> pool = a;
        pool.insert(pool.end(), b.begin(), b.end());
        std::vector<uint32_t> pick(n);
        std::iota(pick.begin(), pick.end(), 0);
        double hits = 0.0, total = 0.0;
        std::vector<double> ga(n), gb(m);
        const double limit = out.U + 1e-9;
        while (true) {
            size_t ai = 0, bi = 0;
            std::vector<bool> in_a(total_count, false);
            for (uint32_t idx : pick) in_a[idx] = true;
            for (size_t i = 0; i < total_count; ++i) {
                if (in_a[i]) ga[ai++] = pool[i];
                else gb[bi++] = pool[i];
            }
            if (u_statistic(ga, gb) <= limit) hits += 1.0;
            total += 1.0;
            // Advance the combination (lexicographic).
            size_t pos = n;
            while (pos > 0) {
                --pos;
                if (pick[pos] != pos + total_count - n) break;
                if (pos == 0) { pos = total_count; break; }
            }
            if (pos >= total_count) break;
            ++pick[pos];
            for (size_t k2 = pos + 1; k2 < n; ++k2) pick[k2] = pick[k2 - 1] + 1;
        }
        out.exact = true;
        out.hits = hits;
        out.total = total;
        out.p = hits / total;
        return out;
    }

    if (!ties && n * m <= 400) {
        // ways[j][u] = number of orderings of i values from a and j from b
        // with exactly u (a beats b) pairs; i advances in the outer loop.
        const size_t umax = n * m;
        std::vector<std::vector<double>> ways(m + 1, std::vector<double>(umax + 1, 0.0));
        for (size_t j = 0; j <= m; ++j) ways[j][0] = 1.0; // i = 0 row
        for (size_t i = 1; i <= n; ++i) {
            std::vector<std::vector<double>> next(m + 1, std::vector<double>(umax + 1, 0.0));
            next[0][0] = 1.0;
            for (size_t j = 1; j <= m; ++j) {
                for (size_t u = 0; u <= i * j; ++u) {
                    double w = next[j - 1][u]; // largest pooled value is from b
                    if (u >= j) w += ways[j][u - j]; // largest is from a: beats all j b's
                    next[j][u] = w;
                }
            }
            ways = std::move(next);
        }
        const auto u_obs = static_cast<size_t>(std::llround(out.U));
        double hits = 0.0;
        for (size_t u = 0; u <= u_obs && u <= umax; ++u) hits += ways[m][u];
        const double total = binomial(static_cast<uint32_t>(total_count), static_cast<uint32_t>(n));
        out.exact = true;
        out.hits = hits;
        out.total = total;
        out.p = hits / total;
        return out;
    }

    // Tie-corrected normal approximation with continuity correction.
    std::vector<double> pool = a;
    pool.insert(pool.end(), b.begin(), b.end());
    std::sort(pool.begin(), pool.end());
    const double N = static_cast<double>(total_count);
    double tie_term = 0.0;
    size_t i = 0;
    while (i < total_count) {
        size_t j = i;
        while (j + 1 < total_count && pool[j + 1] == pool[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    const double mu = 0.5 * static_cast<double>(n) * static_cast<double>(m);
    const double var = (static_cast<double>(n) * static_cast<double>(m) / 12.0) *
                       ((N + 1.0) - tie_term / (N * (N - 1.0)));
    if (var <= 0.0) {
        // Every pooled value identical: U is exactly n*m/2 with certainty.
        out.p = 1.0;
        return out;
    }
    const double z = (out.U + 0.5 - mu) / std::sqrt(var);
    out.p = normal_cdf(z);
    return out;
}

} // namespace qrisk
