#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "debias/geometry.hpp"

namespace debias {

/// One node of a regression tree, stored flat. Leaves carry a constant value;
/// internal nodes route x[split_dim] < threshold to `left`, else `right`.
struct TreeNode {
    bool is_leaf = true;
    double leaf = 0.0;
    int split_dim = 0;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
};

struct RegressionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    double value(Vec2 x) const {
        int i = 0;
        while (!nodes[i].is_leaf) {
            const double v = nodes[i].split_dim == 0 ? x.x : x.y;
            i = v < nodes[i].threshold ? nodes[i].left : nodes[i].right;
        }
        return nodes[i].leaf;
    }
};

struct BoostParams {
    int n_trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_leaf = 5;
};

/// Least-squares gradient boosting over axis-aligned regression trees.
/// Prediction is base_value + learning_rate * sum of tree outputs.
struct GradientBoostPredictor {
    double base_value = 0.0;
    double learning_rate = 1.0;
    std::vector<RegressionTree> trees;
    /// Mean squared training residual after each boosting round
    /// (non-increasing); diagnostic, not serialized.
    std::vector<double> training_loss;

    double value(Vec2 x) const {
        double acc = 0.0;
        for (const auto& t : trees)
            acc += t.value(x);
        return base_value + learning_rate * acc;
    }
};

/// Fits the boosting model with exact greedy splits: every candidate
/// threshold on both axes is scanned and the squared-error reduction
/// maximized, subject to max_depth and min_leaf.
GradientBoostPredictor fit_gradient_boost(std::span<const Vec2> train_x,
                                          std::span<const double> train_y,
                                          const BoostParams& params);

} // namespace debias
