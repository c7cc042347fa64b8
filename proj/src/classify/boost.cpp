#include <cmath>
#include <numeric>

#include "internal.hpp"

namespace oneshot::internal {

namespace {

double multinomial_log_loss(const Eigen::MatrixXd& scores, const std::vector<int>& y) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const double peak = scores.row(i).maxCoeff();
        const double lse = peak + std::log((scores.row(i).array() - peak).exp().sum());
        loss -= scores(i, y[static_cast<std::size_t>(i)]) - lse;
    }
    return loss / static_cast<double>(scores.rows());
}

}  // namespace

// Gradient boosting on multinomial log-loss: per stage one depth-capped
// regression tree per class fitted to the residuals y_ic - p_ic, leaf
// values by the one-step Newton estimate ((K-1)/K) sum r / sum |r|(1-|r|).
// Initial scores are the log class priors; a stage tree that cannot split
// degrades to its root leaf, a constant shift.
TrainedModel train_gbc(const ClassifierSpec& spec, const Problem& problem) {
    ColumnAccess columns(problem.x);
    const Eigen::Index n = problem.x.rows();
    const Eigen::Index d = problem.x.cols();
    const int k = problem.n_classes;

    const Eigen::MatrixXd targets = one_hot(problem.y, k);

    BoostState state;
    state.shrinkage = spec.hp.gbc_shrinkage;
    state.init_scores.resize(k);
    for (int c = 0; c < k; ++c) {
        double count = 0.0;
        for (int label : problem.y) count += label == c ? 1.0 : 0.0;
        state.init_scores[c] = std::log(count / static_cast<double>(n));
    }

    Eigen::MatrixXd scores(n, k);
    scores.rowwise() = state.init_scores;

    TrainDiagnostics diag;
    const double newton_scale = (static_cast<double>(k) - 1.0) / static_cast<double>(k);

    for (int stage = 0; stage < spec.hp.gbc_stages; ++stage) {
        Eigen::MatrixXd probs = scores;
        softmax_rows(probs);

        std::vector<Tree> stage_trees;
        stage_trees.reserve(k);
        for (int c = 0; c < k; ++c) {
            const Eigen::VectorXd residuals = targets.col(c) - probs.col(c);
            Eigen::VectorXd updates = Eigen::VectorXd::Zero(n);

            auto leaf_value = [&](const std::vector<int>& leaf_samples) {
                double num = 0.0, den = 0.0;
                for (int s : leaf_samples) {
                    const double r = residuals[s];
                    num += r;
                    den += std::abs(r) * (1.0 - std::abs(r));
                }
                const double gamma = den > 1e-150 ? newton_scale * num / den : 0.0;
                for (int s : leaf_samples) updates[s] = gamma;
                return gamma;
            };

            std::vector<int> samples(n);
            std::iota(samples.begin(), samples.end(), 0);
            TreeParams params;
            params.max_depth = spec.hp.gbc_tree_depth;
            stage_trees.push_back(
                build_regression_tree(columns, residuals, std::move(samples), params, leaf_value));

            scores.col(c) += state.shrinkage * updates;
        }
        state.stages.push_back(std::move(stage_trees));
        diag.stage_losses.push_back(multinomial_log_loss(scores, problem.y));
    }
    diag.iterations = spec.hp.gbc_stages;

    return TrainedModel(ModelKind::gbc, problem.class_labels, d, std::move(state),
                        std::move(diag));
}

}  // namespace oneshot::internal
