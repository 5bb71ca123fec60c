#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcfp {

class SplitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Split {
    std::vector<std::size_t> train;  // ascending
    std::vector<std::size_t> test;   // ascending
};

/// Per class: shuffle with Pcg32(seed), send round(class_size * test_fraction)
/// rows to test. Throws SplitError("DegenerateSplit") when a class would end
/// up with no train or no test rows.
[[nodiscard]] Split stratified_holdout(std::span<const int> labels, double test_fraction, std::uint64_t seed);

/// Repeated stratified k-fold: repeat r shuffles each class with
/// Pcg32(seeds[r]) and deals rows round-robin into k folds. Returns
/// k * seeds.size() splits, repeat-major. Throws SplitError("TooFewPerClass").
[[nodiscard]] std::vector<Split> stratified_kfold(std::span<const int> labels, int k,
                                                  std::span<const std::uint64_t> seeds);

}  // namespace bcfp
