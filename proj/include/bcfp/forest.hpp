#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcfp/featurize.hpp"

namespace bcfp {

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Row-major real-valued design matrix.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> values;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0F) {}

    [[nodiscard]] std::span<const float> row(std::size_t r) const {
        return std::span<const float>(values).subspan(r * cols, cols);
    }
    [[nodiscard]] float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Copies the listed rows (all rows when `rows` is empty) into a DenseMatrix.
[[nodiscard]] DenseMatrix to_dense(const FeatureMatrix& m, std::span<const std::size_t> rows = {});
[[nodiscard]] std::vector<int> select(std::span<const int> values, std::span<const std::size_t> rows);

enum class MaxFeatures { Sqrt, All };

struct ForestParams {
    int n_trees = 100;
    MaxFeatures max_features = MaxFeatures::Sqrt;
    int min_samples_leaf = 1;
    int min_samples_split = 2;
    int max_depth = 0;  // 0 = unlimited
    bool bootstrap = true;
    std::uint64_t seed = 0;
    int jobs = 1;  // threads used for fitting trees
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // go left when x <= threshold
    int left = -1;
    int right = -1;
    double positive_fraction = 0.0;
    double weight = 0.0;  // weighted sample count reaching the node

    bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes);

    [[nodiscard]] std::span<const TreeNode> nodes() const noexcept { return nodes_; }
    [[nodiscard]] const TreeNode& leaf_for(std::span<const float> x) const;
    [[nodiscard]] double predict(std::span<const float> x) const { return leaf_for(x).positive_fraction; }
    [[nodiscard]] int depth() const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::vector<TreeNode> nodes_;
};

class Forest {
public:
    Forest() = default;
    Forest(std::vector<DecisionTree> trees, ForestParams params, std::size_t n_features);

    [[nodiscard]] std::span<const DecisionTree> trees() const noexcept { return trees_; }
    [[nodiscard]] const ForestParams& params() const noexcept { return params_; }
    [[nodiscard]] std::size_t n_features() const noexcept { return n_features_; }

    /// Mean leaf positive fraction over trees, one value per row.
    /// Throws ModelError("WidthMismatch") when the column count differs.
    [[nodiscard]] std::vector<double> predict_proba(const DenseMatrix& x) const;

    [[nodiscard]] std::string to_json() const;
    [[nodiscard]] static Forest from_json(const std::string& text);

    friend bool operator==(const Forest& a, const Forest& b) {
        return a.n_features_ == b.n_features_ && a.trees_ == b.trees_;
    }

private:
    std::vector<DecisionTree> trees_;
    ForestParams params_;
    std::size_t n_features_ = 0;
};

/// Random forest of CART trees with Gini splits.
///
/// Tree t draws its bootstrap sample and feature candidates from
/// Pcg32(params.seed, stream = t), so the fitted forest does not depend on
/// params.jobs. Throws ModelError on empty input, label/row mismatch or a
/// single class.
[[nodiscard]] Forest train_forest(const DenseMatrix& x, std::span<const int> y, const ForestParams& params);

}  // namespace bcfp
