#include <cmath>

#include "oneshot/error.hpp"
#include "internal.hpp"

namespace oneshot {

namespace detail {

double lrc_loss_grad(const FeatureMatrix& x, const std::vector<int>& y, int n_classes,
                     double lambda, const Eigen::VectorXd& params, Eigen::VectorXd* grad) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    const Eigen::Index wsize = d * n_classes;
    if (params.size() != wsize + n_classes) throw Error("lrc_loss_grad: bad parameter size");

    const Eigen::Map<const Eigen::MatrixXd> w(params.data(), d, n_classes);
    const Eigen::Map<const Eigen::RowVectorXd> b(params.data() + wsize, n_classes);

    Eigen::MatrixXd scores = x.multiply(w);
    scores.rowwise() += b;

    // mean cross-entropy via log-sum-exp, plus (lambda/2)|W|^2 (bias free)
    double loss = 0.0;
    Eigen::MatrixXd probs(n, n_classes);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double peak = scores.row(i).maxCoeff();
        const double lse = peak + std::log((scores.row(i).array() - peak).exp().sum());
        loss -= scores(i, y[static_cast<std::size_t>(i)]) - lse;
        probs.row(i) = (scores.row(i).array() - lse).exp();
    }
    loss /= static_cast<double>(n);
    loss += 0.5 * lambda * w.squaredNorm();

    if (grad) {
        for (Eigen::Index i = 0; i < n; ++i) probs(i, y[static_cast<std::size_t>(i)]) -= 1.0;
        probs /= static_cast<double>(n);

        grad->resize(params.size());
        Eigen::Map<Eigen::MatrixXd> gw(grad->data(), d, n_classes);
        Eigen::Map<Eigen::RowVectorXd> gb(grad->data() + wsize, n_classes);
        if (x.is_sparse()) gw = x.sparse_data().transpose() * probs;
        else gw = x.dense_data().transpose() * probs;
        gw += lambda * w;
        gb = probs.colwise().sum();
    }
    return loss;
}

}  // namespace detail

namespace internal {

TrainedModel train_lrc(const ClassifierSpec& spec, const Problem& problem) {
    const Eigen::Index d = problem.x.cols();
    const int k = problem.n_classes;
    Eigen::VectorXd params = Eigen::VectorXd::Zero(d * k + k);
    Eigen::VectorXd grad;

    TrainDiagnostics diag;
    diag.converged = false;
    for (int iter = 0; iter < spec.hp.lrc_max_iters; ++iter) {
        detail::lrc_loss_grad(problem.x, problem.y, k, spec.hp.lrc_lambda, params, &grad);
        diag.iterations = iter + 1;
        diag.final_gradient_norm = grad.norm();
        if (diag.final_gradient_norm <= spec.hp.lrc_tol) {
            diag.converged = true;
            break;
        }
        params -= spec.hp.lrc_step * grad;
    }
    if (!diag.converged) {
        diag.warnings.push_back("lrc: gradient norm " +
                                std::to_string(diag.final_gradient_norm) + " above tolerance after " +
                                std::to_string(diag.iterations) + " iterations");
    }

    LinearState state;
    state.weights = Eigen::Map<Eigen::MatrixXd>(params.data(), d, k);
    state.bias = Eigen::Map<Eigen::RowVectorXd>(params.data() + d * k, k);
    return TrainedModel(ModelKind::lrc, problem.class_labels, d, std::move(state),
                        std::move(diag));
}

// One-vs-rest hinge + L2, deterministic full-batch subgradient steps
// eta_t = 1/(lambda t). lambda = 1e-4 / C keeps the regularizer weak
// enough that separable supports (one example per class) are always fitted
// exactly, so the solution approaches the maximum-margin separator.
TrainedModel train_svm(const ClassifierSpec& spec, const Problem& problem) {
    const Eigen::Index n = problem.x.rows();
    const Eigen::Index d = problem.x.cols();
    const int k = problem.n_classes;
    const double lambda = 1e-4 / spec.hp.svm_c;

    LinearState state;
    state.weights = Eigen::MatrixXd::Zero(d, k);
    state.bias = Eigen::RowVectorXd::Zero(k);

    Eigen::VectorXd signs(n);
    Eigen::VectorXd coef(n);
    for (int c = 0; c < k; ++c) {
        for (Eigen::Index i = 0; i < n; ++i)
            signs[i] = problem.y[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;

        Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
        double b = 0.0;
        for (int t = 1; t <= spec.hp.svm_steps; ++t) {
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const Eigen::VectorXd margins =
                signs.cwiseProduct((problem.x.multiply(w).array() + b).matrix());

            double bias_sub = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const bool violates = margins[i] < 1.0;
                coef[i] = violates ? signs[i] / static_cast<double>(n) : 0.0;
                if (violates) bias_sub += signs[i];
            }
            Eigen::VectorXd pull(d);
            if (problem.x.is_sparse()) pull = problem.x.sparse_data().transpose() * coef;
            else pull = problem.x.dense_data().transpose() * coef;

            w = (1.0 - eta * lambda) * w + eta * pull;
            b += eta * bias_sub / static_cast<double>(n);
        }
        state.weights.col(c) = w;
        state.bias[c] = b;
    }

    TrainDiagnostics diag;
    diag.iterations = spec.hp.svm_steps;
    return TrainedModel(ModelKind::svm, problem.class_labels, d, std::move(state),
                        std::move(diag));
}

}  // namespace internal

}  // namespace oneshot
