#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace bcfp {

class StatsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kInfiniteDf = std::numeric_limits<double>::infinity();

/// P(Q <= q) for the studentized range of k standard normals divided by an
/// independent sqrt(chi^2_df / df). Pass kInfiniteDf for the known-variance
/// limit.
[[nodiscard]] double studentized_range_cdf(double q, int k, double df);

/// Inverse of studentized_range_cdf in q (bisection), p in (0, 1).
[[nodiscard]] double studentized_range_quantile(double p, int k, double df);

struct TukeyPair {
    std::size_t a = 0;
    std::size_t b = 0;
    double diff = 0.0;  // mean[a] - mean[b]
    double q = 0.0;
    double p = 1.0;
    bool significant = false;
};

struct TukeyResult {
    std::vector<double> means;
    double mse = 0.0;
    double df = 0.0;
    double anova_f = 0.0;
    double anova_p = 1.0;
    double alpha = 0.05;
    bool degenerate = false;  // zero pooled variance
    std::vector<TukeyPair> pairs;  // every a < b

    /// The (a, b) comparison; for a > b the mirrored entry with diff negated.
    [[nodiscard]] TukeyPair pair(std::size_t a, std::size_t b) const;
};

/// One-way ANOVA plus Tukey HSD (Tukey-Kramer for unequal group sizes).
/// Needs k >= 2 groups of at least 2 values each.
[[nodiscard]] TukeyResult tukey_hsd(const std::vector<std::vector<double>>& groups, double alpha = 0.05);

struct Summary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n - 1)
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t n = 0;
};

/// Quartiles use linear interpolation between order statistics.
[[nodiscard]] Summary summarize(std::span<const double> values);

}  // namespace bcfp
