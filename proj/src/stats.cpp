#include "bcfp/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numeric>

namespace bcfp {

namespace {

using Gauss = boost::math::quadrature::gauss<double, 20>;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

// Composite Gauss-Legendre over [lo, hi] split into equal panels.
template <typename F>
double integrate(F&& f, double lo, double hi, int panels) {
    const double width = (hi - lo) / panels;
    double sum = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double a = lo + width * i;
        sum += Gauss::integrate(f, a, a + width);
    }
    return sum;
}

struct InnerNode {
    double z;
    double weighted_pdf;
    double cdf;
};

// Fixed Gauss-Legendre nodes over [-8.5, 8.5] for the range integral.
const std::vector<InnerNode>& inner_nodes() {
    static const std::vector<InnerNode> nodes = [] {
        constexpr int kPanels = 16;
        constexpr double kLo = -8.5;
        constexpr double kHi = 8.5;
        const double width = (kHi - kLo) / kPanels;
        const auto& abscissa = Gauss::abscissa();
        const auto& weights = Gauss::weights();
        std::vector<InnerNode> out;
        for (int p = 0; p < kPanels; ++p) {
            const double mid = kLo + width * (p + 0.5);
            for (std::size_t i = 0; i < abscissa.size(); ++i) {
                for (double sign : {-1.0, 1.0}) {
                    if (i == 0 && sign < 0.0 && abscissa[0] == 0.0) {
                        continue;  // centre node counted once
                    }
                    const double z = mid + sign * abscissa[i] * width / 2;
                    out.push_back({z, weights[i] * width / 2 * normal_pdf(z), normal_cdf(z)});
                }
            }
        }
        return out;
    }();
    return nodes;
}

// P(range of k iid N(0,1) <= w).
double normal_range_cdf(double w, int k) {
    if (w <= 0.0) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& node : inner_nodes()) {
        const double band = node.cdf - normal_cdf(node.z - w);
        if (band > 0.0) {
            sum += node.weighted_pdf * std::pow(band, k - 1);
        }
    }
    return std::clamp(k * sum, 0.0, 1.0);
}

// log density of s = sqrt(chi^2_df / df).
double log_scale_density(double s, double df) {
    if (s <= 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return 0.5 * df * std::log(df) - std::lgamma(0.5 * df) - (0.5 * df - 1.0) * std::log(2.0) +
           (df - 1.0) * std::log(s) - 0.5 * df * s * s;
}

}  // namespace

double studentized_range_cdf(double q, int k, double df) {
    if (k < 2) {
        throw StatsError("studentized range needs k >= 2");
    }
    if (!(df >= 1.0)) {
        throw StatsError("studentized range needs df >= 1");
    }
    if (std::isnan(q)) {
        throw StatsError("q is NaN");
    }
    if (q <= 0.0) {
        return 0.0;
    }
    if (std::isinf(q)) {
        return 1.0;
    }
    if (std::isinf(df) || df > 1e7) {
        return normal_range_cdf(q, k);
    }

    // Truncate the scale integral where the density falls 40 nats below
    // its peak.
    const double mode = df > 1.0 ? std::sqrt((df - 1.0) / df) : 0.0;
    const double peak = df > 1.0 ? log_scale_density(mode, df) : log_scale_density(1e-12, df);
    const double spread = 1.0 / std::sqrt(2.0 * df);
    double hi = mode + spread;
    while (log_scale_density(hi, df) > peak - 40.0) {
        hi += spread;
    }
    double lo = mode;
    while (lo > 0.0 && log_scale_density(lo, df) > peak - 40.0) {
        lo = std::max(0.0, lo - spread);
    }
    const auto outer = [&](double s) { return std::exp(log_scale_density(s, df)) * normal_range_cdf(q * s, k); };
    return std::clamp(integrate(outer, lo, hi, 16), 0.0, 1.0);
}

double studentized_range_quantile(double p, int k, double df) {
    if (!(p > 0.0 && p < 1.0)) {
        throw StatsError("quantile probability must be in (0, 1)");
    }
    double lo = 0.0;
    double hi = 10.0;
    while (studentized_range_cdf(hi, k, df) < p) {
        hi *= 2.0;
        if (hi > 1e6) {
            throw StatsError("quantile search diverged");
        }
    }
    for (int it = 0; it < 60 && hi - lo > 1e-7; ++it) {
        const double mid = 0.5 * (lo + hi);
        (studentized_range_cdf(mid, k, df) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

TukeyPair TukeyResult::pair(std::size_t a, std::size_t b) const {
    for (const auto& p : pairs) {
        if (p.a == a && p.b == b) {
            return p;
        }
        if (p.a == b && p.b == a) {
            TukeyPair mirrored = p;
            std::swap(mirrored.a, mirrored.b);
            mirrored.diff = -p.diff;
            return mirrored;
        }
    }
    throw StatsError("no such Tukey pair");
}

TukeyResult tukey_hsd(const std::vector<std::vector<double>>& groups, double alpha) {
    const std::size_t k = groups.size();
    if (k < 2) {
        throw StatsError("Tukey HSD needs at least two groups");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw StatsError("alpha must be in (0, 1)");
    }
    TukeyResult result;
    result.alpha = alpha;
    double ss_within = 0.0;
    double grand_sum = 0.0;
    std::size_t total_n = 0;
    for (const auto& g : groups) {
        if (g.size() < 2) {
            throw StatsError("every Tukey group needs at least two values");
        }
        const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
        result.means.push_back(mean);
        for (double v : g) {
            ss_within += (v - mean) * (v - mean);
        }
        grand_sum += std::accumulate(g.begin(), g.end(), 0.0);
        total_n += g.size();
    }
    result.df = static_cast<double>(total_n - k);
    result.mse = ss_within / result.df;

    const double grand_mean = grand_sum / static_cast<double>(total_n);
    double ss_between = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double d = result.means[i] - grand_mean;
        ss_between += static_cast<double>(groups[i].size()) * d * d;
    }
    const double ms_between = ss_between / static_cast<double>(k - 1);

    // Scale-aware zero test for the pooled variance.
    double scale = 0.0;
    for (const auto& g : groups) {
        for (double v : g) {
            scale = std::max(scale, std::abs(v));
        }
    }
    result.degenerate = result.mse <= 1e-28 * std::max(1.0, scale * scale);
    if (result.degenerate) {
        result.anova_f = ss_between > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        result.anova_p = ss_between > 0.0 ? 0.0 : 1.0;
    } else {
        result.anova_f = ms_between / result.mse;
        const boost::math::fisher_f dist(static_cast<double>(k - 1), result.df);
        result.anova_p = boost::math::cdf(boost::math::complement(dist, result.anova_f));
    }

    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            TukeyPair pr;
            pr.a = a;
            pr.b = b;
            pr.diff = result.means[a] - result.means[b];
            if (result.degenerate) {
                const bool differ = pr.diff != 0.0;
                pr.q = differ ? std::numeric_limits<double>::infinity() : 0.0;
                pr.p = differ ? 0.0 : 1.0;
            } else {
                const double se = std::sqrt(result.mse / 2.0 *
                                            (1.0 / static_cast<double>(groups[a].size()) +
                                             1.0 / static_cast<double>(groups[b].size())));
                pr.q = std::abs(pr.diff) / se;
                pr.p = std::clamp(1.0 - studentized_range_cdf(pr.q, static_cast<int>(k), result.df), 0.0, 1.0);
            }
            pr.significant = pr.p < alpha;
            result.pairs.push_back(pr);
        }
    }
    return result;
}

Summary summarize(std::span<const double> values) {
    if (values.empty()) {
        throw StatsError("cannot summarize an empty sample");
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    Summary s;
    s.n = v.size();
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(s.n);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - s.mean) * (x - s.mean);
    }
    s.stddev = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
    const auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(s.n - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, s.n - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    s.median = quantile(0.5);
    s.q1 = quantile(0.25);
    s.q3 = quantile(0.75);
    s.min = v.front();
    s.max = v.back();
    return s;
}

}  // namespace bcfp
