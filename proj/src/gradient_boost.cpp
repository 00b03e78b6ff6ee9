#include "debias/gradient_boost.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace debias {

namespace {

double coordinate(Vec2 p, int dim) { return dim == 0 ? p.x : p.y; }

// Builds one tree on the residuals. Index arrays are kept sorted per
// dimension and stably partitioned on each split, so no per-node sorting.
class TreeBuilder {
  public:
    TreeBuilder(std::span<const Vec2> xs, std::span<const double> residual,
                const BoostParams& params)
        : xs_(xs), residual_(residual), params_(params) {
        const int n = static_cast<int>(xs.size());
        for (int d = 0; d < 2; ++d) {
            idx_[d].resize(n);
            std::iota(idx_[d].begin(), idx_[d].end(), 0);
            std::sort(idx_[d].begin(), idx_[d].end(), [&](int a, int b) {
                const double ca = coordinate(xs_[a], d);
                const double cb = coordinate(xs_[b], d);
                return ca < cb || (ca == cb && a < b);
            });
        }
        scratch_.resize(n);
    }

    RegressionTree build() {
        RegressionTree tree;
        nodes_ = &tree.nodes;
        build_node(0, static_cast<int>(xs_.size()), 0);
        return tree;
    }

  private:
    struct Split {
        double gain = 0.0;
        int dim = -1;
        double threshold = 0.0;
    };

    int build_node(int begin, int end, int depth) {
        const int n = end - begin;
        double sum = 0.0;
        for (int k = begin; k < end; ++k)
            sum += residual_[idx_[0][k]];

        const int node_index = static_cast<int>(nodes_->size());
        nodes_->push_back({});

        Split best;
        if (depth < params_.max_depth && n >= 2 * params_.min_leaf)
            best = best_split(begin, end, sum);

        if (best.dim < 0) {
            (*nodes_)[node_index].is_leaf = true;
            (*nodes_)[node_index].leaf = sum / n;
            return node_index;
        }

        const int mid = partition(begin, end, best.dim, best.threshold);
        const int left = build_node(begin, mid, depth + 1);
        const int right = build_node(mid, end, depth + 1);
        auto& node = (*nodes_)[node_index];
        node.is_leaf = false;
        node.split_dim = best.dim;
        node.threshold = best.threshold;
        node.left = left;
        node.right = right;
        return node_index;
    }

    // Exact greedy scan: every boundary between distinct coordinate values is
    // a candidate; gain is the SSE reduction S_L^2/n_L + S_R^2/n_R - S^2/n.
    Split best_split(int begin, int end, double total_sum) const {
        const int n = end - begin;
        const double parent_term = total_sum * total_sum / n;
        Split best;
        for (int d = 0; d < 2; ++d) {
            const auto& order = idx_[d];
            double left_sum = 0.0;
            for (int k = begin; k < end - 1; ++k) {
                left_sum += residual_[order[k]];
                const int n_left = k - begin + 1;
                const int n_right = n - n_left;
                if (n_left < params_.min_leaf || n_right < params_.min_leaf)
                    continue;
                const double c = coordinate(xs_[order[k]], d);
                const double c_next = coordinate(xs_[order[k + 1]], d);
                if (!(c_next > c))
                    continue;
                const double right_sum = total_sum - left_sum;
                const double gain =
                    left_sum * left_sum / n_left + right_sum * right_sum / n_right - parent_term;
                if (gain > best.gain) {
                    double thr = 0.5 * (c + c_next);
                    if (!(thr > c))
                        thr = c_next; // adjacent doubles: keep c strictly left
                    best = {gain, d, thr};
                }
            }
        }
        return best;
    }

    // Stable partition of both sorted index arrays; returns the boundary.
    int partition(int begin, int end, int split_dim, double threshold) {
        int mid = begin;
        for (int d = 0; d < 2; ++d) {
            auto& order = idx_[d];
            int lo = 0, hi = 0;
            for (int k = begin; k < end; ++k) {
                const int i = order[k];
                if (coordinate(xs_[i], split_dim) < threshold)
                    order[begin + lo++] = i;
                else
                    scratch_[hi++] = i;
            }
            std::copy(scratch_.begin(), scratch_.begin() + hi, order.begin() + begin + lo);
            mid = begin + lo;
        }
        return mid;
    }

    std::span<const Vec2> xs_;
    std::span<const double> residual_;
    const BoostParams& params_;
    std::vector<int> idx_[2];
    std::vector<int> scratch_;
    std::vector<TreeNode>* nodes_ = nullptr;
};

} // namespace

GradientBoostPredictor fit_gradient_boost(std::span<const Vec2> train_x,
                                          std::span<const double> train_y,
                                          const BoostParams& params) {
    const std::size_t n = train_x.size();
    if (n == 0)
        throw std::invalid_argument("fit_gradient_boost: empty training set");
    if (train_y.size() != n)
        throw std::invalid_argument("fit_gradient_boost: feature/target size mismatch");
    if (params.min_leaf < 1 || params.max_depth < 0 || params.n_trees < 0)
        throw std::invalid_argument("fit_gradient_boost: invalid parameters");
    if (!(params.learning_rate > 0.0) || params.learning_rate > 1.0)
        throw std::invalid_argument("fit_gradient_boost: learning_rate must be in (0, 1]");
    if (n < 2 * static_cast<std::size_t>(params.min_leaf))
        throw std::invalid_argument("fit_gradient_boost: need at least 2*min_leaf samples");
    for (double y : train_y)
        if (!std::isfinite(y))
            throw std::invalid_argument("fit_gradient_boost: non-finite target");

    GradientBoostPredictor model;
    model.learning_rate = params.learning_rate;
    model.base_value = std::accumulate(train_y.begin(), train_y.end(), 0.0) / n;

    std::vector<double> pred(n, model.base_value);
    std::vector<double> residual(n);
    auto mse = [&] {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = train_y[i] - pred[i];
            acc += d * d;
        }
        return acc / n;
    };

    model.training_loss.reserve(params.n_trees + 1);
    model.training_loss.push_back(mse());

    for (int t = 0; t < params.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i)
            residual[i] = train_y[i] - pred[i];
        TreeBuilder builder(train_x, residual, params);
        model.trees.push_back(builder.build());
        const auto& tree = model.trees.back();
        for (std::size_t i = 0; i < n; ++i)
            pred[i] += params.learning_rate * tree.value(train_x[i]);
        model.training_loss.push_back(mse());
    }
    return model;
}

} // namespace debias
