#include <cmath>
#include <numeric>

#include "internal.hpp"

namespace oneshot::internal {

// Bootstrap resamples are drawn per class with replacement, so every class
// reaches every tree even when it has a single document. Feature
// subsampling is sqrt(d) per split. Per-tree seeds derive from the spec
// seed, keeping the forest independent of fitting order.
TrainedModel train_rfc(const ClassifierSpec& spec, const Problem& problem) {
    ColumnAccess columns(problem.x);
    const Eigen::Index d = problem.x.cols();

    std::vector<std::vector<int>> by_class(problem.n_classes);
    for (std::size_t i = 0; i < problem.y.size(); ++i)
        by_class[problem.y[i]].push_back(static_cast<int>(i));

    const int mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));

    ForestState state;
    state.trees.reserve(spec.hp.rfc_trees);
    for (int t = 0; t < spec.hp.rfc_trees; ++t) {
        Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(t)));

        std::vector<int> samples;
        samples.reserve(problem.y.size());
        for (const auto& members : by_class) {
            for (std::size_t j = 0; j < members.size(); ++j)
                samples.push_back(members[rng.bounded(members.size())]);
        }

        TreeParams params;
        params.max_depth = spec.hp.rfc_max_depth;
        params.mtry = mtry;
        params.rng = &rng;
        state.trees.push_back(build_classification_tree(columns, problem.y, problem.n_classes,
                                                        std::move(samples), params));
    }

    return TrainedModel(ModelKind::rfc, problem.class_labels, d, std::move(state), {});
}

}  // namespace oneshot::internal
