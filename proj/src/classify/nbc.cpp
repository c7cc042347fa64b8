#include <cmath>

#include "internal.hpp"

namespace oneshot::internal {

// Gaussian class-conditional features. Variances are smoothed by
// epsilon = 1e-9 * max per-feature variance over all rows (1.0 when that
// maximum is 0), so a one-document class degrades to a nearest-class-mean
// rule with shared isotropic variance instead of a division by zero.
TrainedModel train_nbc(const ClassifierSpec& spec, const Problem& problem) {
    (void)spec;
    const Eigen::Index n = problem.x.rows();
    const Eigen::Index d = problem.x.cols();
    const int k = problem.n_classes;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d);
    Eigen::MatrixXd sq_sums = Eigen::MatrixXd::Zero(k, d);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);

    auto accumulate = [&](Eigen::Index i, int c) {
        counts[c] += 1.0;
        if (problem.x.is_sparse()) {
            for (FeatureMatrix::SparseData::InnerIterator it(problem.x.sparse_data(), i); it; ++it) {
                sums(c, it.col()) += it.value();
                sq_sums(c, it.col()) += it.value() * it.value();
            }
        } else {
            sums.row(c) += problem.x.dense_data().row(i);
            sq_sums.row(c) += problem.x.dense_data().row(i).array().square().matrix();
        }
    };
    for (Eigen::Index i = 0; i < n; ++i) accumulate(i, problem.y[static_cast<std::size_t>(i)]);

    NbcState state;
    state.means.resize(k, d);
    state.variances.resize(k, d);
    for (int c = 0; c < k; ++c) {
        state.means.row(c) = sums.row(c) / counts[c];
        // population variance, clamped against cancellation
        state.variances.row(c) =
            (sq_sums.row(c) / counts[c] - state.means.row(c).array().square().matrix())
                .cwiseMax(0.0);
    }

    // largest per-feature variance over all rows together
    Eigen::VectorXd total_sum = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd total_sq = Eigen::VectorXd::Zero(d);
    for (int c = 0; c < k; ++c) {
        total_sum += sums.row(c).transpose();
        total_sq += sq_sums.row(c).transpose();
    }
    const Eigen::ArrayXd total_mean = total_sum.array() / static_cast<double>(n);
    const double max_var =
        (total_sq.array() / static_cast<double>(n) - total_mean.square()).cwiseMax(0.0).maxCoeff();
    state.epsilon = 1e-9 * (max_var > 0.0 ? max_var : 1.0);
    state.variances.array() += state.epsilon;

    state.log_priors.resize(k);
    for (int c = 0; c < k; ++c) state.log_priors[c] = std::log(counts[c] / static_cast<double>(n));

    return TrainedModel(ModelKind::nbc, problem.class_labels, d, std::move(state), {});
}

}  // namespace oneshot::internal
