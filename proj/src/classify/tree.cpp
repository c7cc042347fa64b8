#include <algorithm>
#include <cmath>
#include <numeric>

#include "oneshot/error.hpp"
#include "internal.hpp"

namespace oneshot::internal {

ColumnAccess::ColumnAccess(const FeatureMatrix& x) : rows_(x.rows()), cols_(x.cols()) {
    if (x.is_sparse()) {
        sparse_ = x.sparse_data();  // column-major copy for per-feature scans
        sparse_.makeCompressed();
    } else {
        dense_ = &x.dense_data();
    }
}

void ColumnAccess::gather(int feature, const std::vector<int>& samples,
                          std::vector<double>& out) const {
    out.resize(samples.size());
    if (dense_) {
        for (std::size_t i = 0; i < samples.size(); ++i) out[i] = (*dense_)(samples[i], feature);
        return;
    }
    // binary search per sample over the column's sorted row indices; this
    // stays correct when `samples` holds bootstrap duplicates
    const int* inner = sparse_.innerIndexPtr();
    const double* values = sparse_.valuePtr();
    const auto begin = sparse_.outerIndexPtr()[feature];
    const auto end = sparse_.outerIndexPtr()[feature + 1];
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const int row = samples[i];
        const int* hit = std::lower_bound(inner + begin, inner + end, row);
        out[i] = (hit != inner + end && *hit == row) ? values[hit - inner] : 0.0;
    }
}

namespace {

struct NodeTask {
    int node = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
    int depth = 0;
};

// Shared split search. `accumulate(slot)` feeds the left-side statistics
// and `score(n_left)` returns the weighted child impurity for the current
// prefix. Candidates at equal score resolve to the lowest feature index,
// then the lowest threshold.
template <typename InitFn, typename AccumFn, typename ScoreFn>
void scan_feature(const std::vector<double>& values, std::vector<int>& order, int feature,
                  SplitCandidate& best, InitFn init, AccumFn accumulate, ScoreFn score) {
    const std::size_t n = values.size();
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&values](int a, int b) { return values[a] < values[b]; });

    if (values[order.front()] == values[order.back()]) return;  // constant feature

    init();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        accumulate(order[i]);
        const double lo = values[order[i]];
        const double hi = values[order[i + 1]];
        if (!(hi > lo)) continue;
        const double threshold = lo + (hi - lo) / 2.0;
        if (!(threshold >= lo && threshold < hi)) continue;  // midpoint rounded onto hi

        const double s = score(i + 1);
        const bool better =
            !best.found || s < best.score ||
            (s == best.score &&
             (feature < best.feature || (feature == best.feature && threshold < best.threshold)));
        if (better) best = SplitCandidate{true, feature, threshold, s};
    }
}

// Feature visit order for one node. mtry == 0 scans everything in index
// order; otherwise the first `mtry` non-constant features of a seeded
// shuffle, extended until some valid split is found.
template <typename EvalFn>
void visit_features(Eigen::Index n_features, const TreeParams& params,
                    std::vector<int>& feature_order, EvalFn evaluate) {
    feature_order.resize(n_features);
    std::iota(feature_order.begin(), feature_order.end(), 0);
    if (params.mtry <= 0) {
        for (int f : feature_order) evaluate(f);
        return;
    }
    for (Eigen::Index i = n_features - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(params.rng->bounded(i + 1));
        std::swap(feature_order[i], feature_order[j]);
    }
    int inspected = 0;
    for (int f : feature_order) {
        const auto outcome = evaluate(f);
        if (outcome.first) ++inspected;  // non-constant
        if (inspected >= params.mtry && outcome.second) break;  // some split found
    }
}

}  // namespace

Tree build_classification_tree(const ColumnAccess& columns, const std::vector<int>& y,
                               int n_classes, std::vector<int> samples,
                               const TreeParams& params) {
    Tree tree;
    if (samples.empty()) throw Error("tree: no samples");

    std::vector<NodeTask> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, 0, samples.size(), 0});

    std::vector<double> values;
    std::vector<int> order;
    std::vector<int> feature_order;
    std::vector<double> left_counts(n_classes);

    while (!stack.empty()) {
        const NodeTask task = stack.back();
        stack.pop_back();
        const std::size_t n = task.end - task.begin;

        std::vector<double> counts(n_classes, 0.0);
        for (std::size_t i = task.begin; i < task.end; ++i) counts[y[samples[i]]] += 1.0;
        const bool pure =
            std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;

        auto make_leaf = [&] {
            tree.nodes[task.node].feature = -1;
            tree.nodes[task.node].class_counts = counts;
        };
        if (pure || n < 2 || task.depth >= params.max_depth) {
            make_leaf();
            continue;
        }

        SplitCandidate best;
        const std::vector<int> node_samples(samples.begin() + task.begin,
                                            samples.begin() + task.end);
        auto evaluate = [&](int feature) {
            columns.gather(feature, node_samples, values);
            const bool constant =
                *std::min_element(values.begin(), values.end()) ==
                *std::max_element(values.begin(), values.end());
            if (!constant) {
                double left_n = 0.0;
                scan_feature(
                    values, order, feature, best,
                    [&] {
                        std::fill(left_counts.begin(), left_counts.end(), 0.0);
                        left_n = 0.0;
                    },
                    [&](int slot) {
                        left_counts[y[node_samples[slot]]] += 1.0;
                        left_n += 1.0;
                    },
                    [&](std::size_t) {
                        const double right_n = static_cast<double>(n) - left_n;
                        double gini_left = 1.0, gini_right = 1.0;
                        for (int c = 0; c < n_classes; ++c) {
                            const double lc = left_counts[c] / left_n;
                            const double rc = (counts[c] - left_counts[c]) / right_n;
                            gini_left -= lc * lc;
                            gini_right -= rc * rc;
                        }
                        return (left_n * gini_left + right_n * gini_right) / static_cast<double>(n);
                    });
            }
            return std::make_pair(!constant, best.found);
        };
        visit_features(columns.cols(), params, feature_order, evaluate);

        if (!best.found) {
            make_leaf();
            continue;
        }

        columns.gather(best.feature, node_samples, values);
        auto* base = samples.data() + task.begin;
        std::size_t fill = 0;
        std::vector<int> right;
        for (std::size_t i = 0; i < n; ++i) {
            if (values[i] <= best.threshold) base[fill++] = node_samples[i];
            else right.push_back(node_samples[i]);
        }
        std::copy(right.begin(), right.end(), base + fill);

        const int left_index = static_cast<int>(tree.nodes.size());
        const int right_index = left_index + 1;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        tree.nodes[task.node].feature = best.feature;
        tree.nodes[task.node].threshold = best.threshold;
        tree.nodes[task.node].left = left_index;
        tree.nodes[task.node].right = right_index;
        stack.push_back({right_index, task.begin + fill, task.end, task.depth + 1});
        stack.push_back({left_index, task.begin, task.begin + fill, task.depth + 1});
    }
    return tree;
}

Tree build_regression_tree(const ColumnAccess& columns, const Eigen::VectorXd& targets,
                           std::vector<int> samples, const TreeParams& params,
                           const std::function<double(const std::vector<int>&)>& leaf_value) {
    Tree tree;
    if (samples.empty()) throw Error("tree: no samples");

    std::vector<NodeTask> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, 0, samples.size(), 0});

    std::vector<double> values;
    std::vector<int> order;
    std::vector<int> feature_order;

    while (!stack.empty()) {
        const NodeTask task = stack.back();
        stack.pop_back();
        const std::size_t n = task.end - task.begin;

        const std::vector<int> node_samples(samples.begin() + task.begin,
                                            samples.begin() + task.end);
        double total = 0.0, total_sq = 0.0;
        for (int s : node_samples) {
            total += targets[s];
            total_sq += targets[s] * targets[s];
        }
        const double node_sse = total_sq - total * total / static_cast<double>(n);

        auto make_leaf = [&] {
            tree.nodes[task.node].feature = -1;
            tree.nodes[task.node].value = leaf_value(node_samples);
        };
        // node_sse can round slightly negative for constant targets
        if (n < 2 || task.depth >= params.max_depth || node_sse <= 1e-12) {
            make_leaf();
            continue;
        }

        SplitCandidate best;
        auto evaluate = [&](int feature) {
            columns.gather(feature, node_samples, values);
            const bool constant =
                *std::min_element(values.begin(), values.end()) ==
                *std::max_element(values.begin(), values.end());
            if (!constant) {
                double left_sum = 0.0, left_sq = 0.0, left_n = 0.0;
                scan_feature(
                    values, order, feature, best,
                    [&] { left_sum = left_sq = left_n = 0.0; },
                    [&](int slot) {
                        const double t = targets[node_samples[slot]];
                        left_sum += t;
                        left_sq += t * t;
                        left_n += 1.0;
                    },
                    [&](std::size_t) {
                        const double right_n = static_cast<double>(n) - left_n;
                        const double right_sum = total - left_sum;
                        const double right_sq = total_sq - left_sq;
                        const double sse_left = left_sq - left_sum * left_sum / left_n;
                        const double sse_right = right_sq - right_sum * right_sum / right_n;
                        return (sse_left + sse_right) / static_cast<double>(n);
                    });
            }
            return std::make_pair(!constant, best.found);
        };
        visit_features(columns.cols(), params, feature_order, evaluate);

        if (!best.found) {
            make_leaf();
            continue;
        }

        columns.gather(best.feature, node_samples, values);
        auto* base = samples.data() + task.begin;
        std::size_t fill = 0;
        std::vector<int> right;
        for (std::size_t i = 0; i < n; ++i) {
            if (values[i] <= best.threshold) base[fill++] = node_samples[i];
            else right.push_back(node_samples[i]);
        }
        std::copy(right.begin(), right.end(), base + fill);

        const int left_index = static_cast<int>(tree.nodes.size());
        const int right_index = left_index + 1;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        tree.nodes[task.node].feature = best.feature;
        tree.nodes[task.node].threshold = best.threshold;
        tree.nodes[task.node].left = left_index;
        tree.nodes[task.node].right = right_index;
        stack.push_back({right_index, task.begin + fill, task.end, task.depth + 1});
        stack.push_back({left_index, task.begin, task.begin + fill, task.depth + 1});
    }
    return tree;
}

int tree_leaf(const Tree& tree, const Eigen::VectorXd& row) {
    int node = 0;
    while (tree.nodes[node].feature >= 0) {
        const TreeNode& n = tree.nodes[node];
        node = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return node;
}

double tree_regression_value(const Tree& tree, const Eigen::VectorXd& row) {
    return tree.nodes[tree_leaf(tree, row)].value;
}

TrainedModel train_dtc(const ClassifierSpec& spec, const Problem& problem) {
    ColumnAccess columns(problem.x);
    std::vector<int> samples(problem.x.rows());
    std::iota(samples.begin(), samples.end(), 0);

    TreeParams params;
    params.max_depth = spec.hp.dtc_max_depth;
    Tree tree = build_classification_tree(columns, problem.y, problem.n_classes,
                                          std::move(samples), params);
    return TrainedModel(ModelKind::dtc, problem.class_labels, problem.x.cols(), std::move(tree),
                        {});
}

}  // namespace oneshot::internal
