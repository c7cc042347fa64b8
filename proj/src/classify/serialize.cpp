#include "oneshot/classify.hpp"
#include "oneshot/error.hpp"

namespace oneshot {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto n_rows = static_cast<Eigen::Index>(j.size());
    const auto n_cols = n_rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Eigen::MatrixXd m(n_rows, n_cols);
    for (Eigen::Index i = 0; i < n_rows; ++i)
        for (Eigen::Index c = 0; c < n_cols; ++c) m(i, c) = j[i][c].get<double>();
    return m;
}

template <typename Vec>
nlohmann::json vector_to_json(const Vec& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

Eigen::RowVectorXd row_vector_from_json(const nlohmann::json& j) {
    return vector_from_json(j).transpose();
}

nlohmann::json tree_to_json(const Tree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : tree.nodes) {
        nlohmann::json node;
        node["feature"] = n.feature;
        if (n.feature >= 0) {
            node["threshold"] = n.threshold;
            node["left"] = n.left;
            node["right"] = n.right;
        } else if (!n.class_counts.empty()) {
            node["class_counts"] = n.class_counts;
        } else {
            node["value"] = n.value;
        }
        nodes.push_back(std::move(node));
    }
    return nodes;
}

Tree tree_from_json(const nlohmann::json& j) {
    Tree tree;
    for (const auto& node_json : j) {
        TreeNode n;
        n.feature = node_json.at("feature").get<int>();
        if (n.feature >= 0) {
            n.threshold = node_json.at("threshold").get<double>();
            n.left = node_json.at("left").get<int>();
            n.right = node_json.at("right").get<int>();
        } else if (node_json.contains("class_counts")) {
            n.class_counts = node_json["class_counts"].get<std::vector<double>>();
        } else {
            n.value = node_json.at("value").get<double>();
        }
        tree.nodes.push_back(std::move(n));
    }
    return tree;
}

}  // namespace

nlohmann::json TrainedModel::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["kind"] = model_kind_name(kind_);
    j["class_labels"] = class_labels_;
    j["feature_dim"] = feature_dim_;

    nlohmann::json state;
    if (const auto* linear = std::get_if<LinearState>(&state_)) {
        state["weights"] = matrix_to_json(linear->weights);
        state["bias"] = vector_to_json(linear->bias);
    } else if (const auto* nbc = std::get_if<NbcState>(&state_)) {
        state["means"] = matrix_to_json(nbc->means);
        state["variances"] = matrix_to_json(nbc->variances);
        state["log_priors"] = vector_to_json(nbc->log_priors);
        state["epsilon"] = nbc->epsilon;
    } else if (const auto* tree = std::get_if<Tree>(&state_)) {
        state["nodes"] = tree_to_json(*tree);
    } else if (const auto* forest = std::get_if<ForestState>(&state_)) {
        nlohmann::json trees = nlohmann::json::array();
        for (const Tree& tree : forest->trees) trees.push_back(tree_to_json(tree));
        state["trees"] = std::move(trees);
    } else if (const auto* boost = std::get_if<BoostState>(&state_)) {
        state["init_scores"] = vector_to_json(boost->init_scores);
        state["shrinkage"] = boost->shrinkage;
        nlohmann::json stages = nlohmann::json::array();
        for (const auto& stage : boost->stages) {
            nlohmann::json stage_json = nlohmann::json::array();
            for (const Tree& tree : stage) stage_json.push_back(tree_to_json(tree));
            stages.push_back(std::move(stage_json));
        }
        state["stages"] = std::move(stages);
    } else {
        const auto& mlp = std::get<MlpState>(state_);
        state["w1"] = matrix_to_json(mlp.w1);
        state["b1"] = vector_to_json(mlp.b1);
        state["w2"] = matrix_to_json(mlp.w2);
        state["b2"] = vector_to_json(mlp.b2);
    }
    j["state"] = std::move(state);

    nlohmann::json diag;
    diag["converged"] = diagnostics_.converged;
    diag["iterations"] = diagnostics_.iterations;
    diag["final_gradient_norm"] = diagnostics_.final_gradient_norm;
    diag["warnings"] = diagnostics_.warnings;
    j["diagnostics"] = std::move(diag);
    return j;
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
    if (!j.contains("kind") || !j.contains("state"))
        throw Error("model json: missing 'kind' or 'state'");
    const ModelKind kind = model_kind_from_name(j.at("kind").get<std::string>());
    auto labels = j.at("class_labels").get<std::vector<std::string>>();
    const auto feature_dim = j.at("feature_dim").get<Eigen::Index>();
    const nlohmann::json& state_json = j.at("state");

    State state;
    switch (kind) {
        case ModelKind::lrc:
        case ModelKind::svm: {
            LinearState s;
            s.weights = matrix_from_json(state_json.at("weights"));
            s.bias = row_vector_from_json(state_json.at("bias"));
            state = std::move(s);
            break;
        }
        case ModelKind::nbc: {
            NbcState s;
            s.means = matrix_from_json(state_json.at("means"));
            s.variances = matrix_from_json(state_json.at("variances"));
            s.log_priors = vector_from_json(state_json.at("log_priors"));
            s.epsilon = state_json.at("epsilon").get<double>();
            state = std::move(s);
            break;
        }
        case ModelKind::dtc:
            state = tree_from_json(state_json.at("nodes"));
            break;
        case ModelKind::rfc: {
            ForestState s;
            for (const auto& tree_json : state_json.at("trees"))
                s.trees.push_back(tree_from_json(tree_json));
            state = std::move(s);
            break;
        }
        case ModelKind::gbc: {
            BoostState s;
            s.init_scores = row_vector_from_json(state_json.at("init_scores"));
            s.shrinkage = state_json.at("shrinkage").get<double>();
            for (const auto& stage_json : state_json.at("stages")) {
                std::vector<Tree> stage;
                for (const auto& tree_json : stage_json) stage.push_back(tree_from_json(tree_json));
                s.stages.push_back(std::move(stage));
            }
            state = std::move(s);
            break;
        }
        case ModelKind::mlp: {
            MlpState s;
            s.w1 = matrix_from_json(state_json.at("w1"));
            s.b1 = row_vector_from_json(state_json.at("b1"));
            s.w2 = matrix_from_json(state_json.at("w2"));
            s.b2 = row_vector_from_json(state_json.at("b2"));
            state = std::move(s);
            break;
        }
    }

    TrainDiagnostics diag;
    if (j.contains("diagnostics")) {
        const auto& d = j["diagnostics"];
        diag.converged = d.value("converged", true);
        diag.iterations = d.value("iterations", 0);
        diag.final_gradient_norm = d.value("final_gradient_norm", 0.0);
        diag.warnings = d.value("warnings", std::vector<std::string>{});
    }
    return TrainedModel(kind, std::move(labels), feature_dim, std::move(state), std::move(diag));
}

}  // namespace oneshot
