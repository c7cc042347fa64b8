#include <cmath>

#include "oneshot/error.hpp"
#include "internal.hpp"

namespace oneshot {

namespace detail {

double mlp_loss_grad(const FeatureMatrix& x, const std::vector<int>& y, int n_classes, int hidden,
                     const Eigen::VectorXd& params, Eigen::VectorXd* grad) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    const Eigen::Index w1_size = d * hidden;
    const Eigen::Index w2_size = static_cast<Eigen::Index>(hidden) * n_classes;
    if (params.size() != w1_size + hidden + w2_size + n_classes)
        throw Error("mlp_loss_grad: bad parameter size");

    const Eigen::Map<const Eigen::MatrixXd> w1(params.data(), d, hidden);
    const Eigen::Map<const Eigen::RowVectorXd> b1(params.data() + w1_size, hidden);
    const Eigen::Map<const Eigen::MatrixXd> w2(params.data() + w1_size + hidden, hidden, n_classes);
    const Eigen::Map<const Eigen::RowVectorXd> b2(params.data() + w1_size + hidden + w2_size,
                                                  n_classes);

    Eigen::MatrixXd pre_hidden = x.multiply(w1);
    pre_hidden.rowwise() += b1;
    const Eigen::MatrixXd activations = pre_hidden.cwiseMax(0.0);

    Eigen::MatrixXd scores = activations * w2;
    scores.rowwise() += b2;

    double loss = 0.0;
    Eigen::MatrixXd probs(n, n_classes);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double peak = scores.row(i).maxCoeff();
        const double lse = peak + std::log((scores.row(i).array() - peak).exp().sum());
        loss -= scores(i, y[static_cast<std::size_t>(i)]) - lse;
        probs.row(i) = (scores.row(i).array() - lse).exp();
    }
    loss /= static_cast<double>(n);

    if (grad) {
        for (Eigen::Index i = 0; i < n; ++i) probs(i, y[static_cast<std::size_t>(i)]) -= 1.0;
        probs /= static_cast<double>(n);

        grad->resize(params.size());
        Eigen::Map<Eigen::MatrixXd> gw1(grad->data(), d, hidden);
        Eigen::Map<Eigen::RowVectorXd> gb1(grad->data() + w1_size, hidden);
        Eigen::Map<Eigen::MatrixXd> gw2(grad->data() + w1_size + hidden, hidden, n_classes);
        Eigen::Map<Eigen::RowVectorXd> gb2(grad->data() + w1_size + hidden + w2_size, n_classes);

        gw2 = activations.transpose() * probs;
        gb2 = probs.colwise().sum();

        Eigen::MatrixXd delta_hidden = probs * w2.transpose();
        delta_hidden =
            (pre_hidden.array() > 0.0).select(delta_hidden, Eigen::MatrixXd::Zero(n, hidden));
        if (x.is_sparse()) gw1 = x.sparse_data().transpose() * delta_hidden;
        else gw1 = x.dense_data().transpose() * delta_hidden;
        gb1 = delta_hidden.colwise().sum();
    }
    return loss;
}

}  // namespace detail

namespace internal {

// One hidden ReLU layer, softmax cross-entropy, full-batch Adam for a
// fixed epoch cap. Weights start uniform in +-1/sqrt(fan_in) from the
// seeded generator; biases start at zero.
TrainedModel train_mlp(const ClassifierSpec& spec, const Problem& problem) {
    const Eigen::Index d = problem.x.cols();
    const int h = spec.hp.mlp_hidden;
    const int k = problem.n_classes;
    const Eigen::Index w1_size = d * h;
    const Eigen::Index w2_size = static_cast<Eigen::Index>(h) * k;

    Rng rng(spec.seed);
    Eigen::VectorXd params = Eigen::VectorXd::Zero(w1_size + h + w2_size + k);
    const double scale1 = 1.0 / std::sqrt(static_cast<double>(d));
    for (Eigen::Index i = 0; i < w1_size; ++i) params[i] = rng.uniform(-scale1, scale1);
    const double scale2 = 1.0 / std::sqrt(static_cast<double>(h));
    for (Eigen::Index i = 0; i < w2_size; ++i)
        params[w1_size + h + i] = rng.uniform(-scale2, scale2);

    Eigen::VectorXd grad;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(params.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(params.size());
    constexpr double adam_eps = 1e-8;

    TrainDiagnostics diag;
    double beta1_t = 1.0, beta2_t = 1.0;
    for (int epoch = 0; epoch < spec.hp.mlp_epochs; ++epoch) {
        detail::mlp_loss_grad(problem.x, problem.y, k, h, params, &grad);
        beta1_t *= spec.hp.mlp_beta1;
        beta2_t *= spec.hp.mlp_beta2;
        m = spec.hp.mlp_beta1 * m + (1.0 - spec.hp.mlp_beta1) * grad;
        v = spec.hp.mlp_beta2 * v + (1.0 - spec.hp.mlp_beta2) * grad.cwiseProduct(grad);
        const Eigen::VectorXd m_hat = m / (1.0 - beta1_t);
        const Eigen::VectorXd v_hat = v / (1.0 - beta2_t);
        params -=
            spec.hp.mlp_step * (m_hat.array() / (v_hat.array().sqrt() + adam_eps)).matrix();
        diag.iterations = epoch + 1;
    }
    diag.final_gradient_norm = grad.norm();

    MlpState state;
    state.w1 = Eigen::Map<Eigen::MatrixXd>(params.data(), d, h);
    state.b1 = Eigen::Map<Eigen::RowVectorXd>(params.data() + w1_size, h);
    state.w2 = Eigen::Map<Eigen::MatrixXd>(params.data() + w1_size + h, h, k);
    state.b2 = Eigen::Map<Eigen::RowVectorXd>(params.data() + w1_size + h + w2_size, k);
    return TrainedModel(ModelKind::mlp, problem.class_labels, d, std::move(state),
                        std::move(diag));
}

}  // namespace internal

}  // namespace oneshot
