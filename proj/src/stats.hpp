#pragma once

#include <cstdint>
#include <vector>

namespace qrisk {

/// 1-based ranks with ties sharing their average rank.
std::vector<double> average_ranks(const std::vector<double>& xs);

struct SpearmanResult {
    double rho = 0.0;
    double p = 1.0; ///< two-sided
    bool exact = false;
    // When exact: p = hits / total over all distinct rank arrangements.
    uint64_t hits = 0;
    uint64_t total = 0;
};

/// Rank correlation with average-rank ties. The two-sided p-value is an
/// exact permutation count for n <= 12 and a Student-t tail otherwise.
/// Raises UndefinedCorrelation when either input is constant, InvalidArgument
/// for length mismatch or n < 4.
SpearmanResult spearman(const std::vector<double>& xs, const std::vector<double>& ys);

struct MannWhitneyResult {
    double U = 0.0; ///< pairs where a beats b, ties counting half
    double p = 1.0; ///< one-sided: P(U <= observed), "a below b"
    bool exact = false;
    // When exact: p = hits / total over group-label arrangements.
    double hits = 0.0;
    double total = 0.0;
};

/// Mann-Whitney U for "sample a stochastically below sample b". Exact p by
/// full label enumeration when the pooled sample has ties and n+m <= 12, by
/// the classic counting recurrence when tie-free and n*m <= 400, otherwise by
/// tie-corrected normal approximation with continuity correction.
MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

/// Regularized incomplete beta I_x(a, b) by continued fraction; used for the
/// Student-t tail. Exposed for direct testing.
double regularized_incomplete_beta(double a, double b, double x);

double normal_cdf(double z);

} // namespace qrisk
