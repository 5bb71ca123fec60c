#include "bcfp/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "json.hpp"

#include "bcfp/parallel.hpp"
#include "bcfp/random.hpp"

namespace bcfp {

DenseMatrix to_dense(const FeatureMatrix& m, std::span<const std::size_t> rows) {
    const std::size_t n = rows.empty() ? m.rows : rows.size();
    DenseMatrix out(n, m.cols);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = rows.empty() ? i : rows[i];
        if (src >= m.rows) {
            throw ModelError("row index out of range");
        }
        const auto row = m.row(src);
        std::transform(row.begin(), row.end(), out.values.begin() + static_cast<std::ptrdiff_t>(i * m.cols),
                       [](std::uint32_t v) { return static_cast<float>(v); });
    }
    return out;
}

std::vector<int> select(std::span<const int> values, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) {
        out.push_back(values[r]);
    }
    return out;
}

// ----------------------------------------------------------------------------
// Trees
// ----------------------------------------------------------------------------

DecisionTree::DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) {
        throw ModelError("a tree needs at least one node");
    }
    const int n = static_cast<int>(nodes_.size());
    for (const auto& node : nodes_) {
        if (node.feature >= 0 && (node.left <= 0 || node.left >= n || node.right <= 0 || node.right >= n)) {
            throw ModelError("tree node has an invalid child index");
        }
        if (!(node.positive_fraction >= 0.0 && node.positive_fraction <= 1.0)) {
            throw ModelError("leaf probability outside [0, 1]");
        }
    }
}

const TreeNode& DecisionTree::leaf_for(std::span<const float> x) const {
    const TreeNode* node = &nodes_.front();
    while (node->feature >= 0) {
        const int next = x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right;
        node = &nodes_[static_cast<std::size_t>(next)];
    }
    return *node;
}

int DecisionTree::depth() const {
    std::vector<int> d(nodes_.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& node = nodes_[i];
        deepest = std::max(deepest, d[i]);
        if (node.feature >= 0) {
            d[static_cast<std::size_t>(node.left)] = d[i] + 1;
            d[static_cast<std::size_t>(node.right)] = d[i] + 1;
        }
    }
    return deepest;
}

namespace {

// (P^2 + N^2) / W; the Gini impurity decrease of a split is the children's
// sum of this quantity minus the parent's.
double purity(double weight, double positive) {
    if (weight <= 0.0) {
        return 0.0;
    }
    const double negative = weight - positive;
    return (positive * positive + negative * negative) / weight;
}

// Nonzero entries of each row.
struct SparseRows {
    std::vector<std::size_t> row_ptr;
    std::vector<std::uint32_t> col;
    std::vector<float> val;
};

class TreeBuilder {
public:
    TreeBuilder(const SparseRows& sparse, std::size_t n_rows, std::size_t n_cols,
                std::span<const int> y, const ForestParams& params, std::uint64_t stream)
        : sparse_(sparse),
          n_rows_(n_rows),
          n_cols_(n_cols),
          y_(y),
          params_(params),
          rng_(params.seed, stream),
          seen_(n_cols, 0),
          first_(n_cols, 0.0F),
          differs_(n_cols, 0),
          slot_(n_cols, 0) {}

    DecisionTree build() {
        std::vector<double> weight(n_rows_, 0.0);
        if (params_.bootstrap) {
            for (std::size_t i = 0; i < n_rows_; ++i) {
                weight[rng_.bounded(static_cast<std::uint32_t>(n_rows_))] += 1.0;
            }
        } else {
            std::fill(weight.begin(), weight.end(), 1.0);
        }
        weight_ = std::move(weight);
        for (std::uint32_t i = 0; i < n_rows_; ++i) {
            if (weight_[i] > 0.0) {
                samples_.push_back(i);
            }
        }
        mtry_ = params_.max_features == MaxFeatures::All
                    ? n_cols_
                    : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_cols_)))));

        struct Task {
            std::size_t begin;
            std::size_t end;
            int node;
            int depth;
        };
        nodes_.emplace_back();
        std::vector<Task> stack;
        stack.push_back({0, samples_.size(), 0, 0});
        while (!stack.empty()) {
            const Task task = stack.back();
            stack.pop_back();
            double w = 0.0;
            double pos = 0.0;
            for (std::size_t i = task.begin; i < task.end; ++i) {
                const std::uint32_t s = samples_[i];
                w += weight_[s];
                pos += y_[s] == 1 ? weight_[s] : 0.0;
            }
            TreeNode& node = nodes_[static_cast<std::size_t>(task.node)];
            node.weight = w;
            node.positive_fraction = w > 0.0 ? pos / w : 0.0;

            const std::size_t count = task.end - task.begin;
            const bool pure = pos == 0.0 || pos == w;
            const bool too_small = count < static_cast<std::size_t>(params_.min_samples_split) ||
                                   count < 2 * static_cast<std::size_t>(params_.min_samples_leaf);
            const bool too_deep = params_.max_depth > 0 && task.depth >= params_.max_depth;
            if (pure || too_small || too_deep) {
                continue;
            }
            const auto split = find_split(task.begin, task.end, w, pos);
            if (!split) {
                continue;
            }
            const auto mid_it = std::partition(
                samples_.begin() + static_cast<std::ptrdiff_t>(task.begin),
                samples_.begin() + static_cast<std::ptrdiff_t>(task.end),
                [&](std::uint32_t s) { return value(split->feature, s) <= split->threshold; });
            const auto mid = static_cast<std::size_t>(mid_it - samples_.begin());

            const int left = static_cast<int>(nodes_.size());
            const int right = left + 1;
            nodes_.emplace_back();
            nodes_.emplace_back();
            TreeNode& parent = nodes_[static_cast<std::size_t>(task.node)];
            parent.feature = static_cast<int>(split->feature);
            parent.threshold = split->threshold;
            parent.left = left;
            parent.right = right;
            stack.push_back({mid, task.end, right, task.depth + 1});
            stack.push_back({task.begin, mid, left, task.depth + 1});
        }
        return DecisionTree(std::move(nodes_));
    }

private:
    struct Split {
        std::uint32_t feature;
        double threshold;
        double gain;
    };

    float value(std::uint32_t feature, std::uint32_t sample) const {
        const auto first = sparse_.col.begin() + static_cast<std::ptrdiff_t>(sparse_.row_ptr[sample]);
        const auto last = sparse_.col.begin() + static_cast<std::ptrdiff_t>(sparse_.row_ptr[sample + 1]);
        const auto it = std::lower_bound(first, last, feature);
        return it != last && *it == feature ? sparse_.val[static_cast<std::size_t>(it - sparse_.col.begin())] : 0.0F;
    }

    // Features whose value varies over samples_[begin, end), in order of
    // first appearance.
    // Only nonzero entries are visited; a feature missing from some row
    // is zero there.
    void varying_features(std::size_t begin, std::size_t end) {
        touched_.clear();
        for (std::size_t i = begin; i < end; ++i) {
            const std::uint32_t s = samples_[i];
            for (std::size_t e = sparse_.row_ptr[s]; e < sparse_.row_ptr[s + 1]; ++e) {
                const std::uint32_t f = sparse_.col[e];
                const float v = sparse_.val[e];
                if (seen_[f] == 0) {
                    touched_.push_back(f);
                    first_[f] = v;
                } else if (v != first_[f]) {
                    differs_[f] = 1;
                }
                ++seen_[f];
            }
        }
        varying_.clear();
        const std::size_t n = end - begin;
        for (std::uint32_t f : touched_) {
            if (seen_[f] < n || differs_[f] != 0) {
                varying_.push_back(f);
            }
            seen_[f] = 0;
            differs_[f] = 0;
        }
    }

    // Scores up to `mtry_` features drawn without replacement from the
    // features that vary within the node. Candidate statistics come from
    // nonzero entries; the zero level is the node total minus the rest.
    std::optional<Split> find_split(std::size_t begin, std::size_t end, double w, double pos) {
        std::optional<Split> best;
        const double parent = purity(w, pos);
        const std::size_t n = end - begin;
        varying_features(begin, end);
        const std::size_t draws = std::min(mtry_, varying_.size());
        for (std::size_t j = 0; j < draws; ++j) {
            const std::size_t pick = j + rng_.bounded(static_cast<std::uint32_t>(varying_.size() - j));
            std::swap(varying_[j], varying_[pick]);
            slot_[varying_[j]] = static_cast<std::uint32_t>(j + 1);
        }
        entries_.clear();
        for (std::size_t i = begin; i < end; ++i) {
            const std::uint32_t s = samples_[i];
            for (std::size_t e = sparse_.row_ptr[s]; e < sparse_.row_ptr[s + 1]; ++e) {
                const std::uint32_t slot = slot_[sparse_.col[e]];
                if (slot != 0) {
                    entries_.push_back({slot - 1, sparse_.val[e], s});
                }
            }
        }
        std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
            return a.slot != b.slot ? a.slot < b.slot : a.value < b.value;
        });

        std::size_t e = 0;
        for (std::size_t j = 0; j < draws; ++j) {
            const std::uint32_t f = varying_[j];
            slot_[f] = 0;
            levels_.clear();
            Level zero{0.0F, w, pos, n};
            bool zero_placed = false;
            auto place_zero = [&] {
                if (!zero_placed && zero.count > 0) {
                    levels_.push_back(zero);
                }
                zero_placed = true;
            };
            // Negative values sort before the zero level, positive after.
            std::size_t stop = e;
            while (stop < entries_.size() && entries_[stop].slot == j) {
                const Entry& en = entries_[stop];
                zero.weight -= weight_[en.sample];
                zero.positive -= y_[en.sample] == 1 ? weight_[en.sample] : 0.0;
                --zero.count;
                ++stop;
            }
            for (; e < stop; ++e) {
                const Entry& en = entries_[e];
                if (en.value > 0.0F) {
                    place_zero();
                }
                if (levels_.empty() || levels_.back().value != en.value) {
                    levels_.push_back(Level{en.value, 0.0, 0.0, 0});
                }
                levels_.back().weight += weight_[en.sample];
                levels_.back().positive += y_[en.sample] == 1 ? weight_[en.sample] : 0.0;
                ++levels_.back().count;
            }
            place_zero();

            double wl = 0.0;
            double pl = 0.0;
            std::size_t n_left = 0;
            for (std::size_t i = 0; i + 1 < levels_.size(); ++i) {
                wl += levels_[i].weight;
                pl += levels_[i].positive;
                n_left += levels_[i].count;
                if (n_left < static_cast<std::size_t>(params_.min_samples_leaf) ||
                    n - n_left < static_cast<std::size_t>(params_.min_samples_leaf)) {
                    continue;
                }
                const double gain = purity(wl, pl) + purity(w - wl, pos - pl) - parent;
                if (gain <= 1e-12) {
                    continue;
                }
                const double threshold =
                    (static_cast<double>(levels_[i].value) + static_cast<double>(levels_[i + 1].value)) / 2.0;
                const bool better = !best || gain > best->gain ||
                                    (gain == best->gain && (f < best->feature ||
                                                            (f == best->feature && threshold < best->threshold)));
                if (better) {
                    best = Split{f, threshold, gain};
                }
            }
        }
        return best;
    }

    struct Entry {
        std::size_t slot;
        float value;
        std::uint32_t sample;
    };

    struct Level {
        float value = 0.0F;
        double weight = 0.0;
        double positive = 0.0;
        std::size_t count = 0;
    };

    const SparseRows& sparse_;
    std::size_t n_rows_;
    std::size_t n_cols_;
    std::span<const int> y_;
    const ForestParams& params_;
    Pcg32 rng_;

    std::vector<double> weight_;
    std::vector<std::uint32_t> samples_;
    std::vector<std::uint32_t> seen_;
    std::vector<float> first_;
    std::vector<std::uint8_t> differs_;
    std::vector<std::uint32_t> touched_;
    std::vector<std::uint32_t> varying_;
    std::vector<std::uint32_t> slot_;
    std::vector<Entry> entries_;
    std::vector<Level> levels_;
    std::vector<std::pair<float, std::uint32_t>> sorted_;
    std::vector<TreeNode> nodes_;
    std::size_t mtry_ = 1;
};

}  // namespace

// ----------------------------------------------------------------------------
// Forest
// ----------------------------------------------------------------------------

Forest::Forest(std::vector<DecisionTree> trees, ForestParams params, std::size_t n_features)
    : trees_(std::move(trees)), params_(params), n_features_(n_features) {}

std::vector<double> Forest::predict_proba(const DenseMatrix& x) const {
    if (x.cols != n_features_) {
        throw ModelError("WidthMismatch: forest expects " + std::to_string(n_features_) + " columns, got " +
                         std::to_string(x.cols));
    }
    if (trees_.empty()) {
        throw ModelError("forest has no trees");
    }
    std::vector<double> out(x.rows, 0.0);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const auto row = x.row(r);
        double sum = 0.0;
        for (const auto& tree : trees_) {
            sum += tree.predict(row);
        }
        out[r] = std::clamp(sum / static_cast<double>(trees_.size()), 0.0, 1.0);
    }
    return out;
}

Forest train_forest(const DenseMatrix& x, std::span<const int> y, const ForestParams& params) {
    if (x.rows == 0 || x.cols == 0) {
        throw ModelError("EmptyMatrix: nothing to train on");
    }
    if (y.size() != x.rows) {
        throw ModelError("label count does not match row count");
    }
    if (x.rows < 2) {
        throw ModelError("EmptyMatrix: at least two rows are required");
    }
    if (params.n_trees < 1) {
        throw ModelError("n_trees must be at least 1");
    }
    if (params.min_samples_leaf < 1 || params.min_samples_split < 2) {
        throw ModelError("min_samples_leaf >= 1 and min_samples_split >= 2 are required");
    }
    if (x.rows > std::numeric_limits<std::uint32_t>::max()) {
        throw ModelError("too many rows");
    }
    bool has_pos = false;
    bool has_neg = false;
    for (int label : y) {
        if (label != 0 && label != 1) {
            throw ModelError("labels must be 0 or 1");
        }
        (label == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
        throw ModelError("SingleClassError: both classes must be present");
    }

    SparseRows sparse;
    sparse.row_ptr.reserve(x.rows + 1);
    sparse.row_ptr.push_back(0);
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (std::size_t c = 0; c < x.cols; ++c) {
            const float v = x.values[r * x.cols + c];
            if (v != 0.0F) {
                sparse.col.push_back(static_cast<std::uint32_t>(c));
                sparse.val.push_back(v);
            }
        }
        sparse.row_ptr.push_back(sparse.col.size());
    }

    std::vector<DecisionTree> trees(static_cast<std::size_t>(params.n_trees));
    parallel_for(trees.size(), params.jobs, [&](std::size_t t) {
        TreeBuilder builder(sparse, x.rows, x.cols, y, params, static_cast<std::uint64_t>(t));
        trees[t] = builder.build();
    });
    return Forest(std::move(trees), params, x.cols);
}

// ----------------------------------------------------------------------------
// Serialization
// ----------------------------------------------------------------------------

namespace {
constexpr int kForestFormatVersion = 1;
}

std::string Forest::to_json() const {
    nlohmann::json j;
    j["format"] = "bcfp-forest";
    j["version"] = kForestFormatVersion;
    j["n_features"] = n_features_;
    j["params"] = {
        {"n_trees", params_.n_trees},
        {"max_features", params_.max_features == MaxFeatures::Sqrt ? "sqrt" : "all"},
        {"min_samples_leaf", params_.min_samples_leaf},
        {"min_samples_split", params_.min_samples_split},
        {"max_depth", params_.max_depth},
        {"bootstrap", params_.bootstrap},
        {"seed", params_.seed},
    };
    auto& trees = j["trees"] = nlohmann::json::array();
    for (const auto& tree : trees_) {
        nlohmann::json t;
        for (const auto& node : tree.nodes()) {
            t["feature"].push_back(node.feature);
            t["threshold"].push_back(node.threshold);
            t["left"].push_back(node.left);
            t["right"].push_back(node.right);
            t["value"].push_back(node.positive_fraction);
            t["weight"].push_back(node.weight);
        }
        trees.push_back(std::move(t));
    }
    return j.dump();
}

Forest Forest::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("forest JSON: ") + e.what());
    }
    if (j.value("format", "") != "bcfp-forest" || j.value("version", 0) != kForestFormatVersion) {
        throw ModelError("unsupported forest format or version");
    }
    try {
        ForestParams params;
        const auto& p = j.at("params");
        params.n_trees = p.at("n_trees").get<int>();
        params.max_features = p.at("max_features").get<std::string>() == "all" ? MaxFeatures::All : MaxFeatures::Sqrt;
        params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
        params.min_samples_split = p.at("min_samples_split").get<int>();
        params.max_depth = p.at("max_depth").get<int>();
        params.bootstrap = p.at("bootstrap").get<bool>();
        params.seed = p.at("seed").get<std::uint64_t>();

        std::vector<DecisionTree> trees;
        for (const auto& t : j.at("trees")) {
            const auto& feature = t.at("feature");
            std::vector<TreeNode> nodes(feature.size());
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                nodes[i].feature = feature.at(i).get<int>();
                nodes[i].threshold = t.at("threshold").at(i).get<double>();
                nodes[i].left = t.at("left").at(i).get<int>();
                nodes[i].right = t.at("right").at(i).get<int>();
                nodes[i].positive_fraction = t.at("value").at(i).get<double>();
                nodes[i].weight = t.at("weight").at(i).get<double>();
            }
            trees.emplace_back(std::move(nodes));
        }
        return Forest(std::move(trees), params, j.at("n_features").get<std::size_t>());
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("forest JSON: ") + e.what());
    }
}

}  // namespace bcfp
