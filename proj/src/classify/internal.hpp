#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "oneshot/classify.hpp"
#include "oneshot/featurize.hpp"
#include "oneshot/rng.hpp"

namespace oneshot::internal {

// Training-side view of (X, y): class labels sorted lexicographically,
// y mapped to class indices.
struct Problem {
    const FeatureMatrix& x;
    std::vector<int> y;                     // class index per row
    std::vector<std::string> class_labels;  // sorted
    int n_classes = 0;
};

Problem make_problem(const FeatureMatrix& x, const std::vector<std::string>& y);

Eigen::MatrixXd one_hot(const std::vector<int>& y, int n_classes);

// Row-wise softmax in place via log-sum-exp.
void softmax_rows(Eigen::MatrixXd& scores);

// Column-major access to either storage, with per-node gathers for the
// tree builders. Sparse input is copied once into column-major form.
class ColumnAccess {
public:
    explicit ColumnAccess(const FeatureMatrix& x);

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }

    // out[i] = x(samples[i], feature); implicit zeros included.
    void gather(int feature, const std::vector<int>& samples, std::vector<double>& out) const;

private:
    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;
    const Eigen::MatrixXd* dense_ = nullptr;
    Eigen::SparseMatrix<double, Eigen::ColMajor> sparse_;
    // scratch for sparse gathers: sample row -> slot, stamped per gather
    mutable std::vector<int> slot_of_row_;
    mutable std::vector<std::uint32_t> stamp_of_row_;
    mutable std::uint32_t stamp_ = 0;
};

struct SplitCandidate {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;  // weighted child impurity; lower is better
};

struct TreeParams {
    int max_depth = 32;
    // 0 = evaluate every feature (dtc, gbc). Otherwise evaluate `mtry`
    // shuffled non-constant features; when none of them admits a valid
    // split the scan continues through the rest of the shuffle so a
    // splittable node is never forced into an impure leaf.
    int mtry = 0;
    Rng* rng = nullptr;  // required when mtry > 0
};

// CART with Gini impurity over class indices. Ties between equal-score
// splits go to the lowest feature index, then the lowest threshold.
Tree build_classification_tree(const ColumnAccess& columns, const std::vector<int>& y,
                               int n_classes, std::vector<int> samples,
                               const TreeParams& params);

// CART with variance impurity over real targets; leaf values come from
// `leaf_value` evaluated on the leaf's samples (the boosting Newton step).
Tree build_regression_tree(const ColumnAccess& columns, const Eigen::VectorXd& targets,
                           std::vector<int> samples, const TreeParams& params,
                           const std::function<double(const std::vector<int>&)>& leaf_value);

// Index of the leaf reached by a dense feature row.
int tree_leaf(const Tree& tree, const Eigen::VectorXd& row);

double tree_regression_value(const Tree& tree, const Eigen::VectorXd& row);

TrainedModel train_lrc(const ClassifierSpec& spec, const Problem& problem);
TrainedModel train_svm(const ClassifierSpec& spec, const Problem& problem);
TrainedModel train_nbc(const ClassifierSpec& spec, const Problem& problem);
TrainedModel train_dtc(const ClassifierSpec& spec, const Problem& problem);
TrainedModel train_rfc(const ClassifierSpec& spec, const Problem& problem);
TrainedModel train_gbc(const ClassifierSpec& spec, const Problem& problem);
TrainedModel train_mlp(const ClassifierSpec& spec, const Problem& problem);

}  // namespace oneshot::internal
