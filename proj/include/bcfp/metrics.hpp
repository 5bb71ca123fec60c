#pragma once

#include <span>
#include <stdexcept>

namespace bcfp {

class MetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mann-Whitney AUROC with average ranks for tied scores.
/// Throws MetricError("SingleClass") unless both labels occur.
[[nodiscard]] double auroc(std::span<const double> scores, std::span<const int> labels);

/// Step-wise average precision; tied scores form one threshold.
/// Throws MetricError("NoPositives") without a positive label.
[[nodiscard]] double average_precision(std::span<const double> scores, std::span<const int> labels);

/// F1 with score >= threshold predicted positive; 0 when undefined.
[[nodiscard]] double f1_at_threshold(std::span<const double> scores, std::span<const int> labels,
                                     double threshold = 0.5);

}  // namespace bcfp
