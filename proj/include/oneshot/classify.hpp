#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "oneshot/featurize.hpp"

namespace oneshot {

enum class ModelKind { lrc, rfc, svm, nbc, dtc, gbc, mlp };

const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

// One flat record; each classifier reads its own fields. Defaults are
// conventional choices, exposed in the grid config.
struct Hyperparams {
    double lrc_lambda = 1e-4;   // L2 penalty on weights (bias unpenalized)
    double lrc_step = 0.1;
    int lrc_max_iters = 1000;
    double lrc_tol = 1e-6;      // stop when gradient norm falls below

    double svm_c = 1.0;         // lambda = 1 / (C * n_samples)
    int svm_steps = 1000;

    int dtc_max_depth = 32;

    int rfc_trees = 100;
    int rfc_max_depth = 32;

    int gbc_stages = 100;
    double gbc_shrinkage = 0.1;
    int gbc_tree_depth = 3;

    int mlp_hidden = 100;
    double mlp_step = 1e-3;
    double mlp_beta1 = 0.9;
    double mlp_beta2 = 0.999;
    int mlp_epochs = 200;

    void validate(ModelKind kind) const;  // throws Error on out-of-range values
};

struct ClassifierSpec {
    ModelKind kind = ModelKind::lrc;
    Hyperparams hp;
    std::uint64_t seed = 0;
};

// Shared node layout for classification (Gini) and regression (variance)
// trees. Internal nodes route x[feature] <= threshold to `left`; leaves
// have feature == -1 and carry either class counts or a value.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;                 // regression leaf payload
    std::vector<double> class_counts;   // classification leaf payload
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct LinearState {
    Eigen::MatrixXd weights;  // d x K
    Eigen::RowVectorXd bias;  // 1 x K
};

struct NbcState {
    Eigen::MatrixXd means;      // K x d
    Eigen::MatrixXd variances;  // K x d, smoothed
    Eigen::VectorXd log_priors;
    double epsilon = 0.0;
};

struct ForestState {
    std::vector<Tree> trees;
};

struct BoostState {
    Eigen::RowVectorXd init_scores;       // log class priors
    std::vector<std::vector<Tree>> stages;  // stages x K regression trees
    double shrinkage = 0.1;
};

struct MlpState {
    Eigen::MatrixXd w1;  // d x H
    Eigen::RowVectorXd b1;
    Eigen::MatrixXd w2;  // H x K
    Eigen::RowVectorXd b2;
};

struct TrainDiagnostics {
    bool converged = true;
    int iterations = 0;
    double final_gradient_norm = 0.0;
    std::vector<double> stage_losses;  // gbc: training log-loss after each stage
    std::vector<std::string> warnings;
};

// Immutable fitted classifier. Class labels are stored sorted
// lexicographically, which makes every tie-break ("first class order")
// independent of the label order seen at training time.
class TrainedModel {
public:
    using State = std::variant<LinearState, NbcState, Tree, ForestState, BoostState, MlpState>;

    TrainedModel(ModelKind kind, std::vector<std::string> class_labels,
                 Eigen::Index feature_dim, State state, TrainDiagnostics diagnostics);

    ModelKind kind() const { return kind_; }
    const std::vector<std::string>& class_labels() const { return class_labels_; }
    Eigen::Index feature_dim() const { return feature_dim_; }
    const TrainDiagnostics& diagnostics() const { return diagnostics_; }
    const State& state() const { return state_; }

    std::vector<std::string> predict(const FeatureMatrix& x) const;

    // Rows are non-negative and sum to 1 (within 1e-12). For svm these are
    // softmax-calibrated margins: scores, not probabilities.
    Eigen::MatrixXd predict_proba(const FeatureMatrix& x) const;

    // Pre-normalization scores per class (margins, log-posteriors, logits,
    // vote fractions), each kind's natural decision function.
    Eigen::MatrixXd decision_scores(const FeatureMatrix& x) const;

    nlohmann::json to_json() const;
    static TrainedModel from_json(const nlohmann::json& j);

private:
    ModelKind kind_;
    std::vector<std::string> class_labels_;
    Eigen::Index feature_dim_;
    State state_;
    TrainDiagnostics diagnostics_;
};

TrainedModel train(const ClassifierSpec& spec, const FeatureMatrix& x,
                   const std::vector<std::string>& y);

namespace detail {

// Training objectives exposed for finite-difference verification.
// Parameter layouts are column-major matrices then biases.

// params = [W (d*K), b (K)]; returns mean cross-entropy + (lambda/2)*|W|^2.
double lrc_loss_grad(const FeatureMatrix& x, const std::vector<int>& y, int n_classes,
                     double lambda, const Eigen::VectorXd& params, Eigen::VectorXd* grad);

// params = [W1 (d*H), b1 (H), W2 (H*K), b2 (K)]; mean cross-entropy of the
// one-hidden-layer ReLU network.
double mlp_loss_grad(const FeatureMatrix& x, const std::vector<int>& y, int n_classes,
                     int hidden, const Eigen::VectorXd& params, Eigen::VectorXd* grad);

// Lowest index wins ties; labels are sorted, so this is lexicographic.
int argmax_tie_lowest(const Eigen::RowVectorXd& scores);

}  // namespace detail

}  // namespace oneshot
