#include "oneshot/classify.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "oneshot/error.hpp"
#include "internal.hpp"

namespace oneshot {

const char* model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::lrc: return "lrc";
        case ModelKind::rfc: return "rfc";
        case ModelKind::svm: return "svm";
        case ModelKind::nbc: return "nbc";
        case ModelKind::dtc: return "dtc";
        case ModelKind::gbc: return "gbc";
        case ModelKind::mlp: return "mlp";
    }
    return "lrc";
}

ModelKind model_kind_from_name(const std::string& name) {
    for (ModelKind kind : {ModelKind::lrc, ModelKind::rfc, ModelKind::svm, ModelKind::nbc,
                           ModelKind::dtc, ModelKind::gbc, ModelKind::mlp}) {
        if (name == model_kind_name(kind)) return kind;
    }
    throw Error("unknown model kind '" + name + "' (lrc|rfc|svm|nbc|dtc|gbc|mlp)");
}

void Hyperparams::validate(ModelKind kind) const {
    auto require = [&](bool ok, const std::string& what) {
        if (!ok)
            throw Error(std::string("invalid hyperparameter for ") + model_kind_name(kind) + ": " +
                        what);
    };
    switch (kind) {
        case ModelKind::lrc:
            require(lrc_lambda >= 0.0, "lrc_lambda must be >= 0");
            require(lrc_step > 0.0, "lrc_step must be > 0");
            require(lrc_max_iters >= 1, "lrc_max_iters must be >= 1");
            require(lrc_tol >= 0.0, "lrc_tol must be >= 0");
            break;
        case ModelKind::svm:
            require(svm_c > 0.0, "svm_c must be > 0");
            require(svm_steps >= 1, "svm_steps must be >= 1");
            break;
        case ModelKind::dtc:
            require(dtc_max_depth >= 1, "dtc_max_depth must be >= 1");
            break;
        case ModelKind::rfc:
            require(rfc_trees >= 1, "rfc_trees must be >= 1");
            require(rfc_max_depth >= 1, "rfc_max_depth must be >= 1");
            break;
        case ModelKind::gbc:
            require(gbc_stages >= 1, "gbc_stages must be >= 1");
            require(gbc_shrinkage > 0.0, "gbc_shrinkage must be > 0");
            require(gbc_tree_depth >= 1, "gbc_tree_depth must be >= 1");
            break;
        case ModelKind::mlp:
            require(mlp_hidden >= 1, "mlp_hidden must be >= 1");
            require(mlp_step > 0.0, "mlp_step must be > 0");
            require(mlp_beta1 > 0.0 && mlp_beta1 < 1.0, "mlp_beta1 must be in (0, 1)");
            require(mlp_beta2 > 0.0 && mlp_beta2 < 1.0, "mlp_beta2 must be in (0, 1)");
            require(mlp_epochs >= 1, "mlp_epochs must be >= 1");
            break;
        case ModelKind::nbc:
            break;  // no tunables
    }
}

namespace internal {

Problem make_problem(const FeatureMatrix& x, const std::vector<std::string>& y) {
    if (static_cast<std::size_t>(x.rows()) != y.size())
        throw Error("train: X has " + std::to_string(x.rows()) + " rows but y has " +
                    std::to_string(y.size()) + " labels");
    if (y.empty()) throw Error("train: empty training set");
    if (!x.all_finite()) throw Error("train: non-finite feature values");

    std::set<std::string> distinct(y.begin(), y.end());
    if (distinct.size() < 2) throw Error("train: need at least 2 distinct labels");
    if (y.size() < distinct.size())
        throw Error("train: fewer rows than classes");

    Problem problem{x, {}, {distinct.begin(), distinct.end()}, static_cast<int>(distinct.size())};
    problem.y.reserve(y.size());
    for (const auto& label : y) {
        const auto it = std::lower_bound(problem.class_labels.begin(), problem.class_labels.end(),
                                         label);
        problem.y.push_back(static_cast<int>(it - problem.class_labels.begin()));
    }
    return problem;
}

Eigen::MatrixXd one_hot(const std::vector<int>& y, int n_classes) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(y.size()), n_classes);
    for (std::size_t i = 0; i < y.size(); ++i) out(static_cast<Eigen::Index>(i), y[i]) = 1.0;
    return out;
}

void softmax_rows(Eigen::MatrixXd& scores) {
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const double peak = scores.row(i).maxCoeff();
        scores.row(i) = (scores.row(i).array() - peak).exp();
        scores.row(i) /= scores.row(i).sum();
    }
}

}  // namespace internal

namespace detail {

int argmax_tie_lowest(const Eigen::RowVectorXd& scores) {
    int best = 0;
    for (int c = 1; c < scores.size(); ++c)
        if (scores[c] > scores[best]) best = c;
    return best;
}

}  // namespace detail

TrainedModel::TrainedModel(ModelKind kind, std::vector<std::string> class_labels,
                           Eigen::Index feature_dim, State state, TrainDiagnostics diagnostics)
    : kind_(kind), class_labels_(std::move(class_labels)), feature_dim_(feature_dim),
      state_(std::move(state)), diagnostics_(std::move(diagnostics)) {
    if (class_labels_.empty()) throw Error("TrainedModel: empty class labels");
}

TrainedModel train(const ClassifierSpec& spec, const FeatureMatrix& x,
                   const std::vector<std::string>& y) {
    spec.hp.validate(spec.kind);
    const internal::Problem problem = internal::make_problem(x, y);
    switch (spec.kind) {
        case ModelKind::lrc: return internal::train_lrc(spec, problem);
        case ModelKind::svm: return internal::train_svm(spec, problem);
        case ModelKind::nbc: return internal::train_nbc(spec, problem);
        case ModelKind::dtc: return internal::train_dtc(spec, problem);
        case ModelKind::rfc: return internal::train_rfc(spec, problem);
        case ModelKind::gbc: return internal::train_gbc(spec, problem);
        case ModelKind::mlp: return internal::train_mlp(spec, problem);
    }
    throw Error("train: unknown model kind");
}

namespace {

void check_dim(const FeatureMatrix& x, Eigen::Index feature_dim) {
    if (x.cols() != feature_dim)
        throw Error("predict: X has " + std::to_string(x.cols()) + " columns, model expects " +
                    std::to_string(feature_dim));
}

Eigen::MatrixXd nbc_log_posterior(const NbcState& state, const FeatureMatrix& x) {
    const Eigen::Index n = x.rows();
    const int k = static_cast<int>(state.means.rows());
    const Eigen::Index d = state.means.cols();

    // log N(x | mu, sigma^2) summed over features; sparse rows use the
    // zero-baseline decomposition sum_j f(0) + sum_nonzero (f(x_j) - f(0)).
    Eigen::MatrixXd scores(n, k);
    constexpr double log2pi = 1.8378770664093454836;

    Eigen::MatrixXd inv_var = state.variances.cwiseInverse();
    Eigen::VectorXd log_det(k);  // sum_j log sigma_cj^2
    for (int c = 0; c < k; ++c) log_det[c] = state.variances.row(c).array().log().sum();

    if (!x.is_sparse()) {
        const Eigen::MatrixXd& rows = x.dense_data();
        for (Eigen::Index i = 0; i < n; ++i) {
            for (int c = 0; c < k; ++c) {
                const auto diff = rows.row(i) - state.means.row(c);
                const double quad = (diff.array().square() * inv_var.row(c).array()).sum();
                scores(i, c) = state.log_priors[c] -
                               0.5 * (static_cast<double>(d) * log2pi + log_det[c] + quad);
            }
        }
        return scores;
    }

    Eigen::VectorXd base_quad(k);  // quadratic term of the all-zero row
    for (int c = 0; c < k; ++c)
        base_quad[c] = (state.means.row(c).array().square() * inv_var.row(c).array()).sum();

    const auto& s = x.sparse_data();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int c = 0; c < k; ++c) {
            double quad = base_quad[c];
            for (FeatureMatrix::SparseData::InnerIterator it(s, i); it; ++it) {
                const double mu = state.means(c, it.col());
                const double iv = inv_var(c, it.col());
                const double diff = it.value() - mu;
                quad += diff * diff * iv - mu * mu * iv;
            }
            scores(i, c) = state.log_priors[c] -
                           0.5 * (static_cast<double>(d) * log2pi + log_det[c] + quad);
        }
    }
    return scores;
}

}  // namespace

Eigen::MatrixXd TrainedModel::decision_scores(const FeatureMatrix& x) const {
    check_dim(x, feature_dim_);
    const auto k = static_cast<int>(class_labels_.size());

    if (const auto* linear = std::get_if<LinearState>(&state_)) {
        Eigen::MatrixXd scores = x.multiply(linear->weights);
        scores.rowwise() += linear->bias;
        return scores;
    }
    if (const auto* nbc = std::get_if<NbcState>(&state_)) {
        return nbc_log_posterior(*nbc, x);
    }
    if (const auto* tree = std::get_if<Tree>(&state_)) {
        Eigen::MatrixXd scores(x.rows(), k);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const Eigen::VectorXd row = x.row_dense(i);
            const TreeNode& leaf = tree->nodes[internal::tree_leaf(*tree, row)];
            double total = 0.0;
            for (double c : leaf.class_counts) total += c;
            for (int c = 0; c < k; ++c) scores(i, c) = leaf.class_counts[c] / total;
        }
        return scores;
    }
    if (const auto* forest = std::get_if<ForestState>(&state_)) {
        Eigen::MatrixXd votes = Eigen::MatrixXd::Zero(x.rows(), k);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const Eigen::VectorXd row = x.row_dense(i);
            for (const Tree& tree : forest->trees) {
                const TreeNode& leaf = tree.nodes[internal::tree_leaf(tree, row)];
                int best = 0;
                for (int c = 1; c < k; ++c)
                    if (leaf.class_counts[c] > leaf.class_counts[best]) best = c;
                votes(i, best) += 1.0;
            }
        }
        return votes / static_cast<double>(forest->trees.size());
    }
    if (const auto* boost = std::get_if<BoostState>(&state_)) {
        Eigen::MatrixXd scores(x.rows(), k);
        scores.rowwise() = boost->init_scores;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const Eigen::VectorXd row = x.row_dense(i);
            for (const auto& stage : boost->stages)
                for (int c = 0; c < k; ++c)
                    scores(i, c) += boost->shrinkage * internal::tree_regression_value(stage[c], row);
        }
        return scores;
    }
    const auto& mlp = std::get<MlpState>(state_);
    Eigen::MatrixXd hidden = x.multiply(mlp.w1);
    hidden.rowwise() += mlp.b1;
    hidden = hidden.cwiseMax(0.0);
    Eigen::MatrixXd scores = hidden * mlp.w2;
    scores.rowwise() += mlp.b2;
    return scores;
}

std::vector<std::string> TrainedModel::predict(const FeatureMatrix& x) const {
    const Eigen::MatrixXd scores = decision_scores(x);
    std::vector<std::string> labels;
    labels.reserve(scores.rows());
    for (Eigen::Index i = 0; i < scores.rows(); ++i)
        labels.push_back(class_labels_[detail::argmax_tie_lowest(scores.row(i))]);
    return labels;
}

Eigen::MatrixXd TrainedModel::predict_proba(const FeatureMatrix& x) const {
    Eigen::MatrixXd scores = decision_scores(x);
    if (std::holds_alternative<Tree>(state_) || std::holds_alternative<ForestState>(state_)) {
        return scores;  // already class distributions
    }
    internal::softmax_rows(scores);
    return scores;
}

}  // namespace oneshot
