#include "bcfp/splits.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "bcfp/random.hpp"

namespace bcfp {

namespace {

// Stream ids keep split shuffles independent of forest seeds.
constexpr std::uint64_t kHoldoutStream = 0x686F6C646F7574ULL;
constexpr std::uint64_t kKFoldStream = 0x6B666F6C64ULL;

std::array<std::vector<std::size_t>, 2> by_class(std::span<const int> labels) {
    std::array<std::vector<std::size_t>, 2> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw SplitError("labels must be 0 or 1");
        }
        out[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    return out;
}

}  // namespace

Split stratified_holdout(std::span<const int> labels, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw SplitError("test fraction must lie strictly between 0 and 1");
    }
    auto classes = by_class(labels);
    Pcg32 rng(seed, kHoldoutStream);
    Split split;
    for (auto& members : classes) {
        shuffle(std::span<std::size_t>(members), rng);
        const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * test_fraction));
        if (n_test == 0 || n_test >= members.size()) {
            throw SplitError("DegenerateSplit: a class would have no train or no test rows");
        }
        split.test.insert(split.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
        split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

std::vector<Split> stratified_kfold(std::span<const int> labels, int k, std::span<const std::uint64_t> seeds) {
    if (k < 2) {
        throw SplitError("k must be at least 2");
    }
    if (seeds.empty()) {
        throw SplitError("at least one repeat seed is required");
    }
    const auto base = by_class(labels);
    for (const auto& members : base) {
        if (members.size() < static_cast<std::size_t>(k)) {
            throw SplitError("TooFewPerClass: every class needs at least k members");
        }
    }
    const auto folds = static_cast<std::size_t>(k);
    std::vector<Split> out;
    out.reserve(folds * seeds.size());
    for (std::uint64_t seed : seeds) {
        Pcg32 rng(seed, kKFoldStream);
        std::vector<std::size_t> fold_of(labels.size(), 0);
        std::size_t dealt = 0;  // continues across classes to balance fold sizes
        for (auto members : base) {
            shuffle(std::span<std::size_t>(members), rng);
            for (std::size_t idx : members) {
                fold_of[idx] = dealt++ % folds;
            }
        }
        for (std::size_t f = 0; f < folds; ++f) {
            Split split;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                (fold_of[i] == f ? split.test : split.train).push_back(i);
            }
            out.push_back(std::move(split));
        }
    }
    return out;
}

}  // namespace bcfp
