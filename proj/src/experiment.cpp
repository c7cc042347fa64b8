#include "oneshot/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "oneshot/csv.hpp"
#include "oneshot/error.hpp"
#include "oneshot/log.hpp"
#include "oneshot/numformat.hpp"
#include "oneshot/rng.hpp"
#include "oneshot/svg.hpp"

namespace fs = std::filesystem;

namespace oneshot {

const char* featurizer_kind_name(FeaturizerKind kind) {
    switch (kind) {
        case FeaturizerKind::tfidf_word: return "tfidf_word";
        case FeaturizerKind::tfidf_char: return "tfidf_char";
        case FeaturizerKind::word_average: return "word_average";
        case FeaturizerKind::doc_vectors: return "doc_vectors";
    }
    return "tfidf_word";
}

FeaturizerKind featurizer_kind_from_name(const std::string& name) {
    for (FeaturizerKind kind : {FeaturizerKind::tfidf_word, FeaturizerKind::tfidf_char,
                                FeaturizerKind::word_average, FeaturizerKind::doc_vectors}) {
        if (name == featurizer_kind_name(kind)) return kind;
    }
    throw Error("unknown featurizer kind '" + name +
                "' (tfidf_word|tfidf_char|word_average|doc_vectors)");
}

const char* vector_format_name(VectorFormat format) {
    switch (format) {
        case VectorFormat::glove: return "glove";
        case VectorFormat::word2vec_text: return "word2vec_text";
        case VectorFormat::word2vec_binary: return "word2vec_binary";
        case VectorFormat::fasttext: return "fasttext";
    }
    return "glove";
}

VectorFormat vector_format_from_name(const std::string& name) {
    for (VectorFormat format : {VectorFormat::glove, VectorFormat::word2vec_text,
                                VectorFormat::word2vec_binary, VectorFormat::fasttext}) {
        if (name == vector_format_name(format)) return format;
    }
    throw Error("unknown vector format '" + name +
                "' (glove|word2vec_text|word2vec_binary|fasttext)");
}

namespace {

void check_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                const std::string& context) {
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw Error(context + ": unknown key '" + key + "'");
    }
}

nlohmann::json norm_to_json(const NormConfig& norm) {
    return {{"lowercase", norm.lowercase},
            {"strip_accents", norm.strip_accents},
            {"collapse_whitespace", norm.collapse_whitespace}};
}

NormConfig norm_from_json(const nlohmann::json& j) {
    check_keys(j, {"lowercase", "strip_accents", "collapse_whitespace"}, "norm");
    NormConfig norm;
    norm.lowercase = j.value("lowercase", true);
    norm.strip_accents = j.value("strip_accents", false);
    norm.collapse_whitespace = j.value("collapse_whitespace", true);
    return norm;
}

nlohmann::json hyperparams_to_json(const Hyperparams& hp) {
    return {{"lrc_lambda", hp.lrc_lambda},
            {"lrc_step", hp.lrc_step},
            {"lrc_max_iters", hp.lrc_max_iters},
            {"lrc_tol", hp.lrc_tol},
            {"svm_c", hp.svm_c},
            {"svm_steps", hp.svm_steps},
            {"dtc_max_depth", hp.dtc_max_depth},
            {"rfc_trees", hp.rfc_trees},
            {"rfc_max_depth", hp.rfc_max_depth},
            {"gbc_stages", hp.gbc_stages},
            {"gbc_shrinkage", hp.gbc_shrinkage},
            {"gbc_tree_depth", hp.gbc_tree_depth},
            {"mlp_hidden", hp.mlp_hidden},
            {"mlp_step", hp.mlp_step},
            {"mlp_beta1", hp.mlp_beta1},
            {"mlp_beta2", hp.mlp_beta2},
            {"mlp_epochs", hp.mlp_epochs}};
}

Hyperparams hyperparams_from_json(const nlohmann::json& j) {
    check_keys(j, {"lrc_lambda", "lrc_step", "lrc_max_iters", "lrc_tol", "svm_c", "svm_steps",
                   "dtc_max_depth", "rfc_trees", "rfc_max_depth", "gbc_stages", "gbc_shrinkage",
                   "gbc_tree_depth", "mlp_hidden", "mlp_step", "mlp_beta1", "mlp_beta2",
                   "mlp_epochs"},
               "hyperparams");
    Hyperparams hp;
    hp.lrc_lambda = j.value("lrc_lambda", hp.lrc_lambda);
    hp.lrc_step = j.value("lrc_step", hp.lrc_step);
    hp.lrc_max_iters = j.value("lrc_max_iters", hp.lrc_max_iters);
    hp.lrc_tol = j.value("lrc_tol", hp.lrc_tol);
    hp.svm_c = j.value("svm_c", hp.svm_c);
    hp.svm_steps = j.value("svm_steps", hp.svm_steps);
    hp.dtc_max_depth = j.value("dtc_max_depth", hp.dtc_max_depth);
    hp.rfc_trees = j.value("rfc_trees", hp.rfc_trees);
    hp.rfc_max_depth = j.value("rfc_max_depth", hp.rfc_max_depth);
    hp.gbc_stages = j.value("gbc_stages", hp.gbc_stages);
    hp.gbc_shrinkage = j.value("gbc_shrinkage", hp.gbc_shrinkage);
    hp.gbc_tree_depth = j.value("gbc_tree_depth", hp.gbc_tree_depth);
    hp.mlp_hidden = j.value("mlp_hidden", hp.mlp_hidden);
    hp.mlp_step = j.value("mlp_step", hp.mlp_step);
    hp.mlp_beta1 = j.value("mlp_beta1", hp.mlp_beta1);
    hp.mlp_beta2 = j.value("mlp_beta2", hp.mlp_beta2);
    hp.mlp_epochs = j.value("mlp_epochs", hp.mlp_epochs);
    return hp;
}

}  // namespace

nlohmann::json FeaturizerSpec::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["kind"] = featurizer_kind_name(kind);
    j["norm"] = norm_to_json(norm);
    switch (kind) {
        case FeaturizerKind::tfidf_word:
            break;
        case FeaturizerKind::tfidf_char:
            j["n_min"] = n_min;
            j["n_max"] = n_max;
            break;
        case FeaturizerKind::word_average:
            j["vectors"] = vectors_path;
            j["vector_format"] = vector_format_name(vector_format);
            j["restrict_vocabulary"] = restrict_vocabulary;
            j["subword"] = subword;
            if (subword) {
                j["subword_n_min"] = subword_n_min;
                j["subword_n_max"] = subword_n_max;
                j["subword_buckets"] = subword_buckets;
                j["subword_seed"] = subword_seed;
                if (!subword_sidecar.empty()) j["subword_sidecar"] = subword_sidecar;
            }
            break;
        case FeaturizerKind::doc_vectors:
            j["vectors"] = vectors_path;
            break;
    }
    return j;
}

FeaturizerSpec FeaturizerSpec::from_json(const nlohmann::json& j) {
    check_keys(j, {"name", "kind", "norm", "n_min", "n_max", "vectors", "vector_format",
                   "restrict_vocabulary", "subword", "subword_n_min", "subword_n_max",
                   "subword_buckets", "subword_seed", "subword_sidecar"},
               "featurizer");
    FeaturizerSpec spec;
    if (!j.contains("name") || !j.contains("kind"))
        throw Error("featurizer: 'name' and 'kind' are required");
    spec.name = j["name"].get<std::string>();
    spec.kind = featurizer_kind_from_name(j["kind"].get<std::string>());
    if (j.contains("norm")) spec.norm = norm_from_json(j["norm"]);
    spec.n_min = j.value("n_min", spec.n_min);
    spec.n_max = j.value("n_max", spec.n_max);
    spec.vectors_path = j.value("vectors", spec.vectors_path);
    if (j.contains("vector_format"))
        spec.vector_format = vector_format_from_name(j["vector_format"].get<std::string>());
    spec.restrict_vocabulary = j.value("restrict_vocabulary", false);
    spec.subword = j.value("subword", false);
    spec.subword_n_min = j.value("subword_n_min", spec.subword_n_min);
    spec.subword_n_max = j.value("subword_n_max", spec.subword_n_max);
    spec.subword_buckets = j.value("subword_buckets", spec.subword_buckets);
    spec.subword_seed = j.value("subword_seed", spec.subword_seed);
    spec.subword_sidecar = j.value("subword_sidecar", spec.subword_sidecar);

    if ((spec.kind == FeaturizerKind::word_average || spec.kind == FeaturizerKind::doc_vectors) &&
        spec.vectors_path.empty()) {
        throw Error("featurizer '" + spec.name + "': 'vectors' path is required for kind " +
                    featurizer_kind_name(spec.kind));
    }
    return spec;
}

nlohmann::json DatasetSpec::to_json() const {
    return {{"name", name},
            {"path", path},
            {"format", format == CorpusFormat::csv ? "csv" : "jsonl"}};
}

DatasetSpec DatasetSpec::from_json(const nlohmann::json& j) {
    check_keys(j, {"name", "path", "format"}, "dataset");
    if (!j.contains("name") || !j.contains("path"))
        throw Error("dataset: 'name' and 'path' are required");
    DatasetSpec spec;
    spec.name = j["name"].get<std::string>();
    spec.path = j["path"].get<std::string>();
    const std::string format = j.value("format", std::string("csv"));
    if (format == "csv") spec.format = CorpusFormat::csv;
    else if (format == "jsonl") spec.format = CorpusFormat::jsonl;
    else throw Error("dataset '" + spec.name + "': unknown format '" + format + "'");
    return spec;
}

nlohmann::json ModelSpec::to_json() const {
    return {{"name", name},
            {"kind", model_kind_name(classifier.kind)},
            {"hyperparams", hyperparams_to_json(classifier.hp)}};
}

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
    check_keys(j, {"name", "kind", "hyperparams"}, "model");
    if (!j.contains("name") || !j.contains("kind"))
        throw Error("model: 'name' and 'kind' are required");
    ModelSpec spec;
    spec.name = j["name"].get<std::string>();
    spec.classifier.kind = model_kind_from_name(j["kind"].get<std::string>());
    if (j.contains("hyperparams")) spec.classifier.hp = hyperparams_from_json(j["hyperparams"]);
    return spec;
}

nlohmann::json GridConfig::to_json() const {
    nlohmann::json j;
    nlohmann::json ds = nlohmann::json::array();
    for (const auto& d : datasets) ds.push_back(d.to_json());
    nlohmann::json fs_json = nlohmann::json::array();
    for (const auto& f : featurizers) fs_json.push_back(f.to_json());
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& m : models) ms.push_back(m.to_json());
    j["datasets"] = std::move(ds);
    j["featurizers"] = std::move(fs_json);
    j["models"] = std::move(ms);
    j["repeats"] = repeats;
    j["base_seed"] = base_seed;
    j["output_dir"] = output_dir;
    j["averaging"] = averaging_name(averaging);
    j["fit_scope"] = fit_scope == FitScope::transductive ? "transductive" : "support_only";
    // jobs is an execution parameter, not an experiment parameter: results
    // do not depend on it, so the snapshot omits it (the run manifest
    // records it)
    return j;
}

GridConfig GridConfig::from_json(const nlohmann::json& j) {
    check_keys(j, {"datasets", "featurizers", "models", "repeats", "base_seed", "output_dir",
                   "averaging", "fit_scope", "jobs"},
               "config");
    GridConfig config;
    if (!j.contains("datasets") || !j.contains("featurizers") || !j.contains("models"))
        throw Error("config: 'datasets', 'featurizers' and 'models' are required");
    for (const auto& d : j["datasets"]) config.datasets.push_back(DatasetSpec::from_json(d));
    for (const auto& f : j["featurizers"])
        config.featurizers.push_back(FeaturizerSpec::from_json(f));
    for (const auto& m : j["models"]) config.models.push_back(ModelSpec::from_json(m));
    config.repeats = j.value("repeats", config.repeats);
    config.base_seed = j.value("base_seed", config.base_seed);
    config.output_dir = j.value("output_dir", config.output_dir);
    if (j.contains("averaging"))
        config.averaging = averaging_from_name(j["averaging"].get<std::string>());
    if (j.contains("fit_scope")) {
        const std::string scope = j["fit_scope"].get<std::string>();
        if (scope == "transductive") config.fit_scope = FitScope::transductive;
        else if (scope == "support_only") config.fit_scope = FitScope::support_only;
        else throw Error("config: unknown fit_scope '" + scope + "'");
    }
    config.jobs = j.value("jobs", config.jobs);
    return config;
}

GridConfig GridConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(path + ": " + e.what());
    }
    GridConfig config = from_json(j);
    config.validate();
    return config;
}

void GridConfig::validate() const {
    if (datasets.empty()) throw Error("config: no datasets");
    if (featurizers.empty()) throw Error("config: no featurizers");
    if (models.empty()) throw Error("config: no models");
    if (repeats < 1) throw Error("config: repeats must be >= 1");
    if (jobs < 0) throw Error("config: jobs must be >= 0");
    if (output_dir.empty()) throw Error("config: output_dir is required");

    auto check_unique = [](const std::vector<std::string>& names, const std::string& what) {
        std::vector<std::string> sorted = names;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw Error("config: duplicate " + what + " name");
    };
    std::vector<std::string> names;
    for (const auto& d : datasets) names.push_back(d.name);
    check_unique(names, "dataset");
    names.clear();
    for (const auto& f : featurizers) names.push_back(f.name);
    check_unique(names, "featurizer");
    names.clear();
    for (const auto& m : models) names.push_back(m.name);
    check_unique(names, "model");

    // fail fast on missing resources, before any cell runs
    for (const auto& d : datasets) {
        if (!fs::exists(d.path)) throw Error("config: dataset file does not exist: " + d.path);
    }
    for (const auto& f : featurizers) {
        if (f.kind == FeaturizerKind::word_average || f.kind == FeaturizerKind::doc_vectors) {
            if (!fs::exists(f.vectors_path))
                throw Error("config: vectors file does not exist: " + f.vectors_path);
        }
        if (!f.subword_sidecar.empty() && !fs::exists(f.subword_sidecar))
            throw Error("config: subword sidecar does not exist: " + f.subword_sidecar);
        if (f.kind == FeaturizerKind::tfidf_char && (f.n_min < 1 || f.n_min > f.n_max || f.n_max > 8))
            throw Error("config: featurizer '" + f.name + "': invalid n-gram range");
    }
}

bool GridResult::has_failures() const {
    return std::any_of(cells.begin(), cells.end(),
                       [](const CellResult& c) { return c.failed(); });
}

const CellResult* GridResult::find_cell(const std::string& dataset, const std::string& featurizer,
                                        const std::string& model) const {
    for (const auto& cell : cells) {
        if (cell.dataset == dataset && cell.featurizer == featurizer && cell.model == model)
            return &cell;
    }
    return nullptr;
}

namespace {

MetricStats stats_of(const std::vector<double>& values) {
    MetricStats stats;
    if (values.empty()) return stats;
    double sum = 0.0;
    stats.min = values.front();
    stats.max = values.front();
    for (double v : values) {
        sum += v;
        stats.min = std::min(stats.min, v);
        stats.max = std::max(stats.max, v);
    }
    stats.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
        stats.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return stats;
}

nlohmann::json stats_to_json(const MetricStats& stats) {
    return {{"mean", stats.mean}, {"stddev", stats.stddev}, {"min", stats.min},
            {"max", stats.max}};
}

MetricStats stats_from_json(const nlohmann::json& j) {
    MetricStats stats;
    stats.mean = j.at("mean").get<double>();
    stats.stddev = j.at("stddev").get<double>();
    stats.min = j.at("min").get<double>();
    stats.max = j.at("max").get<double>();
    return stats;
}

// Fitted featurizer state shared read-only by every cell of a dataset:
// the transform of the full corpus, sliced per split.
struct PreparedFeaturizer {
    FeatureMatrix full;
};

PreparedFeaturizer prepare_featurizer(const FeaturizerSpec& spec, const Corpus& corpus,
                                      std::vector<ResourceInfo>* resources) {
    const auto& docs = corpus.documents();
    PreparedFeaturizer out;
    switch (spec.kind) {
        case FeaturizerKind::tfidf_word: {
            const TfidfModel model = fit_tfidf(docs, Analyzer::word, spec.n_min, spec.n_max,
                                               spec.norm);
            out.full = transform_tfidf(model, docs);
            break;
        }
        case FeaturizerKind::tfidf_char: {
            const TfidfModel model =
                fit_tfidf(docs, Analyzer::character, spec.n_min, spec.n_max, spec.norm);
            out.full = transform_tfidf(model, docs);
            break;
        }
        case FeaturizerKind::word_average: {
            std::unordered_set<std::string> corpus_tokens;
            ParseOptions parse_opt;
            if (spec.restrict_vocabulary) {
                for (const auto& doc : docs)
                    for (auto& token : word_tokenize(doc.text, spec.norm))
                        corpus_tokens.insert(std::move(token));
                parse_opt.restrict_to = &corpus_tokens;
            }
            EmbeddingTable table;
            switch (spec.vector_format) {
                case VectorFormat::glove: table = parse_glove(spec.vectors_path, parse_opt); break;
                case VectorFormat::word2vec_text:
                    table = parse_word2vec(spec.vectors_path, false, parse_opt);
                    break;
                case VectorFormat::word2vec_binary:
                    table = parse_word2vec(spec.vectors_path, true, parse_opt);
                    break;
                case VectorFormat::fasttext:
                    table = parse_fasttext_vec(spec.vectors_path, parse_opt);
                    break;
            }
            if (resources)
                resources->push_back({spec.vectors_path, "vectors",
                                      static_cast<std::uint64_t>(fs::file_size(spec.vectors_path)),
                                      table.size()});
            if (spec.subword) {
                SubwordModel subword =
                    spec.subword_sidecar.empty()
                        ? SubwordModel(std::move(table), spec.subword_n_min, spec.subword_n_max,
                                       spec.subword_buckets, spec.subword_seed)
                        : SubwordModel::with_sidecar(std::move(table), spec.subword_n_min,
                                                     spec.subword_n_max, spec.subword_sidecar);
                EmbedStats stats;
                out.full = embed_average(docs, subword.table(), &subword, spec.norm, &stats);
                if (stats.documents_with_no_vector > 0)
                    log::warn("featurizer '" + spec.name + "': " +
                              std::to_string(stats.documents_with_no_vector) +
                              " documents produced zero vectors");
            } else {
                EmbedStats stats;
                out.full = embed_average(docs, table, nullptr, spec.norm, &stats);
                if (stats.documents_with_no_vector > 0)
                    log::warn("featurizer '" + spec.name + "': " +
                              std::to_string(stats.documents_with_no_vector) +
                              " documents produced zero vectors");
            }
            break;
        }
        case FeaturizerKind::doc_vectors: {
            const DocVectorFile dvf = load_doc_vectors(spec.vectors_path);
            if (resources)
                resources->push_back({spec.vectors_path, "doc_vectors",
                                      static_cast<std::uint64_t>(fs::file_size(spec.vectors_path)),
                                      dvf.size()});
            out.full = doc_vector_features(docs, dvf);
            break;
        }
    }
    return out;
}

struct DatasetState {
    Corpus corpus;
    std::vector<OneShotSplit> splits;  // one per repeat
};

std::vector<Eigen::Index> to_eigen_indices(const std::vector<std::size_t>& v) {
    std::vector<Eigen::Index> out;
    out.reserve(v.size());
    for (std::size_t i : v) out.push_back(static_cast<Eigen::Index>(i));
    return out;
}

std::vector<std::string> labels_of(const std::vector<Document>& docs) {
    std::vector<std::string> labels;
    labels.reserve(docs.size());
    for (const auto& doc : docs) labels.push_back(doc.label);
    return labels;
}

void run_cell(const GridConfig& config, const DatasetState& dataset,
              const FeaturizerSpec& featurizer_spec, const PreparedFeaturizer& prepared,
              const ModelSpec& model_spec, CellResult& cell) {
    for (int r = 0; r < config.repeats; ++r) {
        const auto started = std::chrono::steady_clock::now();
        const OneShotSplit& split = dataset.splits[static_cast<std::size_t>(r)];

        FeatureMatrix x_support, x_query;
        if (config.fit_scope == FitScope::transductive ||
            featurizer_spec.kind == FeaturizerKind::word_average ||
            featurizer_spec.kind == FeaturizerKind::doc_vectors) {
            x_support = prepared.full.select_rows(to_eigen_indices(split.support_indices));
            x_query = prepared.full.select_rows(to_eigen_indices(split.query_indices));
        } else {
            // ablation mode: vocabulary statistics from the support set only
            const Analyzer analyzer = featurizer_spec.kind == FeaturizerKind::tfidf_word
                                          ? Analyzer::word
                                          : Analyzer::character;
            const TfidfModel model = fit_tfidf(split.support, analyzer, featurizer_spec.n_min,
                                               featurizer_spec.n_max, featurizer_spec.norm);
            x_support = transform_tfidf(model, split.support);
            x_query = transform_tfidf(model, split.query);
        }

        ClassifierSpec classifier = model_spec.classifier;
        classifier.seed = derive_seed(config.base_seed, cell.cell_index,
                                      static_cast<std::uint64_t>(r));
        const TrainedModel model = train(classifier, x_support, labels_of(split.support));
        const std::vector<std::string> predictions = model.predict(x_query);

        RepeatResult repeat;
        repeat.split_seed = split.seed;
        repeat.report = evaluate(labels_of(split.query), predictions, dataset.corpus.labels(),
                                 config.averaging);
        repeat.wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - started)
                             .count();
        cell.repeats.push_back(std::move(repeat));
    }

    std::vector<double> acc, prec, rec, f1;
    for (const auto& r : cell.repeats) {
        acc.push_back(r.report.accuracy);
        prec.push_back(r.report.precision);
        rec.push_back(r.report.recall);
        f1.push_back(r.report.f1);
    }
    cell.accuracy = stats_of(acc);
    cell.precision = stats_of(prec);
    cell.recall = stats_of(rec);
    cell.f1 = stats_of(f1);
}

}  // namespace

GridResult run_grid(const GridConfig& config) {
    config.validate();

    GridResult result;
    result.config = config;

    // datasets, splits and fitted featurizer state are prepared up front
    // and shared read-only by the cell workers
    std::vector<DatasetState> datasets;
    datasets.reserve(config.datasets.size());
    for (const auto& spec : config.datasets) {
        DatasetState state;
        state.corpus = load_corpus(spec.path, spec.format);
        state.splits.reserve(config.repeats);
        for (int r = 0; r < config.repeats; ++r)
            state.splits.push_back(
                one_shot_split(state.corpus, config.base_seed + static_cast<std::uint64_t>(r)));
        result.resources.push_back({spec.path, "dataset",
                                    static_cast<std::uint64_t>(fs::file_size(spec.path)),
                                    state.corpus.size()});
        datasets.push_back(std::move(state));
    }

    std::vector<std::vector<PreparedFeaturizer>> prepared(datasets.size());
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        for (const auto& fspec : config.featurizers) {
            prepared[d].push_back(prepare_featurizer(
                fspec, datasets[d].corpus, d == 0 ? &result.resources : nullptr));
        }
    }

    const std::size_t n_cells =
        config.datasets.size() * config.featurizers.size() * config.models.size();
    result.cells.resize(n_cells);
    for (std::size_t d = 0; d < config.datasets.size(); ++d) {
        for (std::size_t f = 0; f < config.featurizers.size(); ++f) {
            for (std::size_t m = 0; m < config.models.size(); ++m) {
                const std::size_t index =
                    (d * config.featurizers.size() + f) * config.models.size() + m;
                CellResult& cell = result.cells[index];
                cell.cell_index = index;
                cell.dataset = config.datasets[d].name;
                cell.featurizer = config.featurizers[f].name;
                cell.model = config.models[m].name;
            }
        }
    }

    unsigned n_jobs = config.jobs > 0 ? static_cast<unsigned>(config.jobs)
                                      : std::max(1u, std::thread::hardware_concurrency());
    n_jobs = std::min<unsigned>(n_jobs, static_cast<unsigned>(n_cells));

    std::atomic<std::size_t> next_cell{0};
    auto worker = [&] {
        while (true) {
            const std::size_t index = next_cell.fetch_add(1);
            if (index >= n_cells) return;
            CellResult& cell = result.cells[index];
            const std::size_t per_dataset = config.featurizers.size() * config.models.size();
            const std::size_t d = index / per_dataset;
            const std::size_t f = (index % per_dataset) / config.models.size();
            const std::size_t m = index % config.models.size();
            try {
                run_cell(config, datasets[d], config.featurizers[f], prepared[d][f],
                         config.models[m], cell);
                log::info("cell " + std::to_string(index + 1) + "/" + std::to_string(n_cells) +
                          " " + cell.dataset + "/" + cell.featurizer + "/" + cell.model +
                          " accuracy " + std::to_string(cell.accuracy.mean));
            } catch (const std::exception& e) {
                cell.error = e.what();
                cell.repeats.clear();
                log::error("cell " + cell.dataset + "/" + cell.featurizer + "/" + cell.model +
                           " failed: " + cell.error);
            }
        }
    };

    if (n_jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_jobs);
        for (unsigned t = 0; t < n_jobs; ++t) pool.emplace_back(worker);
        for (auto& thread : pool) thread.join();
    }
    return result;
}

nlohmann::json GridResult::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["config"] = config.to_json();

    nlohmann::json resources_json = nlohmann::json::array();
    for (const auto& r : resources) {
        resources_json.push_back(
            {{"path", r.path}, {"role", r.role}, {"bytes", r.bytes}, {"entries", r.entries}});
    }
    j["resources"] = std::move(resources_json);

    nlohmann::json cells_json = nlohmann::json::array();
    for (const auto& cell : cells) {
        nlohmann::json c;
        c["cell_index"] = cell.cell_index;
        c["dataset"] = cell.dataset;
        c["featurizer"] = cell.featurizer;
        c["model"] = cell.model;
        if (cell.failed()) {
            c["error"] = cell.error;
        } else {
            c["accuracy"] = stats_to_json(cell.accuracy);
            c["precision"] = stats_to_json(cell.precision);
            c["recall"] = stats_to_json(cell.recall);
            c["f1"] = stats_to_json(cell.f1);
            nlohmann::json reps = nlohmann::json::array();
            for (const auto& r : cell.repeats) {
                reps.push_back({{"split_seed", r.split_seed}, {"report", r.report.to_json()}});
            }
            c["repeats"] = std::move(reps);
        }
        cells_json.push_back(std::move(c));
    }
    j["cells"] = std::move(cells_json);
    return j;
}

GridResult GridResult::from_json(const nlohmann::json& j) {
    GridResult result;
    result.config = GridConfig::from_json(j.at("config"));
    for (const auto& r : j.at("resources")) {
        result.resources.push_back({r.at("path").get<std::string>(),
                                    r.at("role").get<std::string>(),
                                    r.at("bytes").get<std::uint64_t>(),
                                    r.at("entries").get<std::uint64_t>()});
    }
    for (const auto& c : j.at("cells")) {
        CellResult cell;
        cell.cell_index = c.at("cell_index").get<std::size_t>();
        cell.dataset = c.at("dataset").get<std::string>();
        cell.featurizer = c.at("featurizer").get<std::string>();
        cell.model = c.at("model").get<std::string>();
        if (c.contains("error")) {
            cell.error = c["error"].get<std::string>();
        } else {
            cell.accuracy = stats_from_json(c.at("accuracy"));
            cell.precision = stats_from_json(c.at("precision"));
            cell.recall = stats_from_json(c.at("recall"));
            cell.f1 = stats_from_json(c.at("f1"));
            for (const auto& r : c.at("repeats")) {
                RepeatResult repeat;
                repeat.split_seed = r.at("split_seed").get<std::uint64_t>();
                repeat.report = EvalReport::from_json(r.at("report"));
                cell.repeats.push_back(std::move(repeat));
            }
        }
        result.cells.push_back(std::move(cell));
    }
    return result;
}

namespace {

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << body;
    if (!out) throw IoError("write failed: " + path);
}

std::string metric_or_failed(const CellResult* cell, const MetricStats CellResult::* member) {
    if (!cell || cell->failed()) return "failed";
    return format_fixed4((cell->*member).mean);
}

}  // namespace

void emit_table(const GridResult& result, const std::string& dataset, TableFormat format,
                const std::string& path) {
    bool known = false;
    for (const auto& d : result.config.datasets) known = known || d.name == dataset;
    if (!known) throw Error("emit_table: unknown dataset '" + dataset + "'");

    std::string body;
    if (format == TableFormat::csv) {
        body = "Model,Features,Accuracy,Precision,Recall,F1\n";
    } else {
        body = "| Model | Features | Accuracy | Precision | Recall | F1 |\n";
        body += "|---|---|---|---|---|---|\n";
    }
    for (const auto& model : result.config.models) {
        for (const auto& featurizer : result.config.featurizers) {
            const CellResult* cell = result.find_cell(dataset, featurizer.name, model.name);
            const std::string acc = metric_or_failed(cell, &CellResult::accuracy);
            const std::string prec = metric_or_failed(cell, &CellResult::precision);
            const std::string rec = metric_or_failed(cell, &CellResult::recall);
            const std::string f1 = metric_or_failed(cell, &CellResult::f1);
            if (format == TableFormat::csv) {
                body += csv::escape_field(model.name) + "," + csv::escape_field(featurizer.name) +
                        "," + acc + "," + prec + "," + rec + "," + f1 + "\n";
            } else {
                body += "| " + model.name + " | " + featurizer.name + " | " + acc + " | " + prec +
                        " | " + rec + " | " + f1 + " |\n";
            }
        }
    }
    write_text_file(path, body);
}

namespace {

std::vector<std::vector<std::optional<double>>> accuracy_grid(const GridResult& result,
                                                              const std::string& dataset) {
    bool known = false;
    for (const auto& d : result.config.datasets) known = known || d.name == dataset;
    if (!known) throw Error("unknown dataset '" + dataset + "'");

    std::vector<std::vector<std::optional<double>>> values;
    for (const auto& model : result.config.models) {
        std::vector<std::optional<double>> row;
        for (const auto& featurizer : result.config.featurizers) {
            const CellResult* cell = result.find_cell(dataset, featurizer.name, model.name);
            if (cell && !cell->failed()) row.emplace_back(cell->accuracy.mean);
            else row.emplace_back(std::nullopt);
        }
        values.push_back(std::move(row));
    }
    return values;
}

std::vector<std::string> model_names(const GridResult& result) {
    std::vector<std::string> names;
    for (const auto& m : result.config.models) names.push_back(m.name);
    return names;
}

std::vector<std::string> featurizer_names(const GridResult& result) {
    std::vector<std::string> names;
    for (const auto& f : result.config.featurizers) names.push_back(f.name);
    return names;
}

}  // namespace

void emit_barchart(const GridResult& result, const std::string& dataset, const std::string& path) {
    const auto values = accuracy_grid(result, dataset);
    write_text_file(path,
                    svg::grouped_bar_chart(model_names(result), featurizer_names(result), values,
                                           dataset + ": accuracy by model and feature set"));
}

void emit_heatmap(const GridResult& result, const std::string& dataset, const std::string& path) {
    const auto values = accuracy_grid(result, dataset);
    write_text_file(path, svg::heatmap(model_names(result), featurizer_names(result), values,
                                       dataset + ": accuracy heatmap"));
}

void write_grid_outputs(const GridResult& result, const std::string& dir) {
    fs::create_directories(dir);
    for (const auto& dataset : result.config.datasets) {
        const fs::path sub = fs::path(dir) / dataset.name;
        fs::create_directories(sub);
        emit_table(result, dataset.name, TableFormat::csv, (sub / "table.csv").string());
        emit_table(result, dataset.name, TableFormat::markdown, (sub / "table.md").string());
        emit_barchart(result, dataset.name, (sub / "accuracy_bars.svg").string());
        emit_heatmap(result, dataset.name, (sub / "accuracy_heatmap.svg").string());
    }
    write_text_file((fs::path(dir) / "grid.json").string(), result.to_json().dump(2) + "\n");
    write_text_file((fs::path(dir) / "config_canonical.json").string(),
                    result.config.to_json().dump(2) + "\n");
}

}  // namespace oneshot
