#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bcfp/experiment.hpp"
#include "bcfp/stats.hpp"

namespace bcfp {

enum class Metric { Auroc, Auprc, F1 };

inline constexpr Metric kMetrics[] = {Metric::Auroc, Metric::Auprc, Metric::F1};

[[nodiscard]] std::string_view to_string(Metric m) noexcept;
[[nodiscard]] double metric_value(const MetricRecord& r, Metric m) noexcept;

struct ConfigSummary {
    std::string config;
    Summary auroc;
    Summary auprc;
    Summary f1;

    [[nodiscard]] const Summary& of(Metric m) const noexcept;
};

/// Config ids in display order: by radius, then fingerprint kind, pooling
/// and OOV. Ids that are not scheme ids sort last, alphabetically.
[[nodiscard]] std::vector<std::string> ordered_configs(std::vector<std::string> ids);

[[nodiscard]] std::vector<ConfigSummary> summarize_records(const std::vector<MetricRecord>& records);

/// "0.932±0.015": three decimals, sample standard deviation.
[[nodiscard]] std::string format_mean_std(const Summary& s);

struct TukeyRow {
    Metric metric;
    std::string config_a;
    std::string config_b;
    TukeyPair pair;
};

/// Tukey HSD per metric with configs as groups. Empty when fewer than two
/// configs have at least two records.
[[nodiscard]] std::vector<TukeyRow> tukey_rows(const std::vector<MetricRecord>& records, double alpha);
void write_tukey_csv(std::ostream& out, const std::vector<TukeyRow>& rows);

/// Box plot per config (median, quartiles, 1.5 IQR whiskers, outliers),
/// grouped by radius; the best and worst mean are highlighted.
[[nodiscard]] std::string render_boxplot_svg(const std::vector<MetricRecord>& records, Metric metric);

struct ReportOutput {
    std::string table;  // human-readable summary
    std::vector<std::string> warnings;
    std::vector<std::filesystem::path> files;
    std::vector<TukeyRow> tukey;
};

/// Writes summary.csv, tukey.csv (when k >= 2) and boxplot_<metric>.svg
/// into `out_dir`. `expected_configs` (may be empty) enables MissingConfig
/// warnings.
ReportOutput write_report(const std::vector<MetricRecord>& records, const std::filesystem::path& out_dir,
                          double alpha, const std::vector<std::string>& expected_configs = {});

}  // namespace bcfp
