// Command-line surface for the one-shot classification pipeline.
// Subcommands wrap the library operations with file I/O; structured logs go
// to stderr, data to files or stdout. Exit codes: 0 success, 1 validation
// error, 2 partial grid failure, 3 I/O error.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <unordered_set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oneshot/classify.hpp"
#include "oneshot/corpus.hpp"
#include "oneshot/embedio.hpp"
#include "oneshot/error.hpp"
#include "oneshot/experiment.hpp"
#include "oneshot/featurize.hpp"
#include "oneshot/log.hpp"
#include "oneshot/metrics.hpp"
#include "oneshot/numformat.hpp"
#include "oneshot/tokenize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitPartialGrid = 2;
constexpr int kExitIo = 3;

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::uint64_t entropy_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

json base_manifest(const std::string& command) {
    json m;
    m["tool"] = "oneshot";
    m["version"] = kVersion;
    m["command"] = command;
    m["created_at"] = iso_timestamp();
    return m;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw oneshot::IoError("cannot write file: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw oneshot::IoError("write failed: " + path);
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw oneshot::Error("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw oneshot::Error(path + ": " + e.what());
    }
    return j;
}

// ---------------------------------------------------------------------------
// featurizer flags shared by `featurize` and `train`

struct FeaturizerFlags {
    std::string kind = "tfidf_word";
    int n_min = 2;
    int n_max = 4;
    std::string vectors;
    std::string vector_format = "glove";
    bool restrict_vocabulary = false;
    bool subword = false;
    int subword_n_min = 3;
    int subword_n_max = 6;
    std::uint32_t subword_buckets = 2'000'000;
    std::uint64_t subword_seed = 0;
    std::string subword_sidecar;
    bool no_lowercase = false;
    bool strip_accents = false;
    bool no_collapse_whitespace = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--featurizer", kind,
                        "featurizer kind: tfidf_word|tfidf_char|word_average|doc_vectors")
            ->capture_default_str();
        cmd->add_option("--n-min", n_min, "character n-gram minimum length (tfidf_char)")
            ->capture_default_str();
        cmd->add_option("--n-max", n_max, "character n-gram maximum length (tfidf_char)")
            ->capture_default_str();
        cmd->add_option("--vectors", vectors,
                        "pretrained vector file (word_average) or document-vector JSONL "
                        "(doc_vectors)");
        cmd->add_option("--vector-format", vector_format,
                        "vector file format: glove|word2vec_text|word2vec_binary|fasttext")
            ->capture_default_str();
        cmd->add_flag("--restrict-vocabulary", restrict_vocabulary,
                      "load only vectors for tokens that occur in the corpus (saves memory)");
        cmd->add_flag("--subword", subword, "compose out-of-vocabulary words from hashed subwords");
        cmd->add_option("--subword-n-min", subword_n_min, "subword n-gram minimum length")
            ->capture_default_str();
        cmd->add_option("--subword-n-max", subword_n_max, "subword n-gram maximum length")
            ->capture_default_str();
        cmd->add_option("--subword-buckets", subword_buckets, "subword hash bucket count")
            ->capture_default_str();
        cmd->add_option("--subword-seed", subword_seed, "seed for derived bucket vectors")
            ->capture_default_str();
        cmd->add_option("--subword-sidecar", subword_sidecar,
                        "bucket-vector sidecar file (word2vec text, tokens 0..buckets-1)");
        cmd->add_flag("--no-lowercase", no_lowercase, "keep the original letter case");
        cmd->add_flag("--strip-accents", strip_accents, "map accented Latin letters to ASCII");
        cmd->add_flag("--no-collapse-whitespace", no_collapse_whitespace,
                      "keep whitespace runs as-is");
    }

    oneshot::FeaturizerSpec to_spec() const {
        oneshot::FeaturizerSpec spec;
        spec.name = kind;
        spec.kind = oneshot::featurizer_kind_from_name(kind);
        spec.n_min = n_min;
        spec.n_max = n_max;
        spec.vectors_path = vectors;
        if (!vectors.empty() || spec.kind == oneshot::FeaturizerKind::word_average ||
            spec.kind == oneshot::FeaturizerKind::doc_vectors) {
            spec.vector_format = oneshot::vector_format_from_name(vector_format);
        }
        spec.restrict_vocabulary = restrict_vocabulary;
        spec.subword = subword;
        spec.subword_n_min = subword_n_min;
        spec.subword_n_max = subword_n_max;
        spec.subword_buckets = subword_buckets;
        spec.subword_seed = subword_seed;
        spec.subword_sidecar = subword_sidecar;
        spec.norm.lowercase = !no_lowercase;
        spec.norm.strip_accents = strip_accents;
        spec.norm.collapse_whitespace = !no_collapse_whitespace;
        if ((spec.kind == oneshot::FeaturizerKind::word_average ||
             spec.kind == oneshot::FeaturizerKind::doc_vectors) &&
            spec.vectors_path.empty()) {
            throw oneshot::Error("--vectors is required for featurizer kind " + kind);
        }
        return spec;
    }
};

struct FittedFeaturizer {
    oneshot::FeaturizerSpec spec;
    std::optional<oneshot::TfidfModel> tfidf;
    std::optional<oneshot::EmbeddingTable> table;
    std::optional<oneshot::SubwordModel> subword;
    std::optional<oneshot::DocVectorFile> docvecs;
};

oneshot::EmbeddingTable load_table(const oneshot::FeaturizerSpec& spec,
                                   const std::vector<oneshot::Document>& docs) {
    std::unordered_set<std::string> corpus_tokens;
    oneshot::ParseOptions opt;
    if (spec.restrict_vocabulary) {
        for (const auto& doc : docs)
            for (auto& token : oneshot::word_tokenize(doc.text, spec.norm))
                corpus_tokens.insert(std::move(token));
        opt.restrict_to = &corpus_tokens;
    }
    switch (spec.vector_format) {
        case oneshot::VectorFormat::glove: return oneshot::parse_glove(spec.vectors_path, opt);
        case oneshot::VectorFormat::word2vec_text:
            return oneshot::parse_word2vec(spec.vectors_path, false, opt);
        case oneshot::VectorFormat::word2vec_binary:
            return oneshot::parse_word2vec(spec.vectors_path, true, opt);
        case oneshot::VectorFormat::fasttext:
            return oneshot::parse_fasttext_vec(spec.vectors_path, opt);
    }
    throw oneshot::Error("unknown vector format");
}

FittedFeaturizer fit_featurizer(const oneshot::FeaturizerSpec& spec,
                                const std::vector<oneshot::Document>& fit_docs) {
    FittedFeaturizer fitted;
    fitted.spec = spec;
    switch (spec.kind) {
        case oneshot::FeaturizerKind::tfidf_word:
            fitted.tfidf = oneshot::fit_tfidf(fit_docs, oneshot::Analyzer::word, spec.n_min,
                                              spec.n_max, spec.norm);
            break;
        case oneshot::FeaturizerKind::tfidf_char:
            fitted.tfidf = oneshot::fit_tfidf(fit_docs, oneshot::Analyzer::character, spec.n_min,
                                              spec.n_max, spec.norm);
            break;
        case oneshot::FeaturizerKind::word_average: {
            oneshot::EmbeddingTable table = load_table(spec, fit_docs);
            if (spec.subword) {
                if (spec.subword_sidecar.empty()) {
                    fitted.subword = oneshot::SubwordModel(std::move(table), spec.subword_n_min,
                                                           spec.subword_n_max, spec.subword_buckets,
                                                           spec.subword_seed);
                } else {
                    fitted.subword = oneshot::SubwordModel::with_sidecar(
                        std::move(table), spec.subword_n_min, spec.subword_n_max,
                        spec.subword_sidecar);
                }
            } else {
                fitted.table = std::move(table);
            }
            break;
        }
        case oneshot::FeaturizerKind::doc_vectors:
            fitted.docvecs = oneshot::load_doc_vectors(spec.vectors_path);
            break;
    }
    return fitted;
}

oneshot::FeatureMatrix transform_featurizer(const FittedFeaturizer& fitted,
                                            const std::vector<oneshot::Document>& docs) {
    if (fitted.tfidf) return oneshot::transform_tfidf(*fitted.tfidf, docs);
    if (fitted.subword)
        return oneshot::embed_average(docs, fitted.subword->table(), &*fitted.subword,
                                      fitted.spec.norm);
    if (fitted.table) return oneshot::embed_average(docs, *fitted.table, nullptr, fitted.spec.norm);
    return oneshot::doc_vector_features(docs, *fitted.docvecs);
}

json featurizer_envelope(const FittedFeaturizer& fitted) {
    json j;
    j["spec"] = fitted.spec.to_json();
    // tfidf state is embedded; resource-backed kinds are reloaded from the
    // paths in the spec
    if (fitted.tfidf) j["tfidf_state"] = oneshot::tfidf_to_json(*fitted.tfidf);
    return j;
}

// Rebuild a featurizer for evaluation. tfidf state travels inside the
// envelope; resource-backed kinds reload from their paths, restricting to
// the eval corpus when the spec asks for a filtered load (only its tokens
// are ever looked up, so the result is unchanged).
FittedFeaturizer featurizer_from_envelope(const json& j,
                                          const std::vector<oneshot::Document>& eval_docs) {
    FittedFeaturizer fitted;
    fitted.spec = oneshot::FeaturizerSpec::from_json(j.at("spec"));
    if (j.contains("tfidf_state")) {
        fitted.tfidf = oneshot::tfidf_from_json(j["tfidf_state"]);
        return fitted;
    }
    return fit_featurizer(fitted.spec, eval_docs);
}

// ---------------------------------------------------------------------------

void require_absent(const std::vector<fs::path>& paths, bool force) {
    if (force) return;
    for (const auto& p : paths) {
        if (fs::exists(p))
            throw oneshot::Error("output already exists: " + p.string() +
                                 " (use --force to overwrite)");
    }
}

int cmd_split_tasks(const std::string& source_path, const std::string& format,
                    const std::string& out_dir, bool force) {
    const oneshot::CorpusFormat fmt =
        format == "jsonl" ? oneshot::CorpusFormat::jsonl : oneshot::CorpusFormat::csv;
    const oneshot::ThreeWaySource source = oneshot::load_three_way_source(source_path, fmt);
    const oneshot::TaskSet tasks = oneshot::build_tasks(source);

    const fs::path dir(out_dir);
    const std::vector<fs::path> outputs = {dir / "dc.csv", dir / "dr.csv", dir / "dcr.csv"};
    require_absent(outputs, force);
    require_absent({dir / "run_manifest.json"}, force);
    fs::create_directories(dir);

    oneshot::save_corpus_csv(tasks.dc, outputs[0].string());
    oneshot::save_corpus_csv(tasks.dr, outputs[1].string());
    oneshot::save_corpus_csv(tasks.dcr, outputs[2].string());

    std::cout << "source rows: " << source.rows.size() << "\n"
              << "dc.csv: " << tasks.dc.size() << " documents, " << tasks.dc.labels().size()
              << " labels\n"
              << "dr.csv: " << tasks.dr.size() << " documents, " << tasks.dr.labels().size()
              << " labels\n"
              << "dcr.csv: " << tasks.dcr.size() << " documents, " << tasks.dcr.labels().size()
              << " labels\n";

    json manifest = base_manifest("split-tasks");
    manifest["inputs"] = {source_path};
    manifest["outputs"] = {outputs[0].string(), outputs[1].string(), outputs[2].string()};
    manifest["source_rows"] = source.rows.size();
    write_json_file((dir / "run_manifest.json").string(), manifest);
    return kExitOk;
}

int cmd_split(const std::string& corpus_path, const std::string& format,
              std::optional<std::uint64_t> seed_opt, const std::string& out_dir, bool force) {
    const oneshot::CorpusFormat fmt =
        format == "jsonl" ? oneshot::CorpusFormat::jsonl : oneshot::CorpusFormat::csv;
    const oneshot::Corpus corpus = oneshot::load_corpus(corpus_path, fmt);
    const std::uint64_t seed = seed_opt ? *seed_opt : entropy_seed();
    const oneshot::OneShotSplit split = oneshot::one_shot_split(corpus, seed);

    const fs::path dir(out_dir);
    const std::vector<fs::path> outputs = {dir / "support.csv", dir / "query.csv"};
    require_absent(outputs, force);
    require_absent({dir / "run_manifest.json"}, force);
    fs::create_directories(dir);

    oneshot::save_corpus_csv(oneshot::Corpus("support", split.support), outputs[0].string());
    oneshot::save_corpus_csv(oneshot::Corpus("query", split.query), outputs[1].string());

    std::cout << "seed: " << seed << "\n"
              << "support.csv: " << split.support.size() << " documents\n"
              << "query.csv: " << split.query.size() << " documents\n";

    json manifest = base_manifest("split");
    manifest["inputs"] = {corpus_path};
    manifest["outputs"] = {outputs[0].string(), outputs[1].string()};
    manifest["seed"] = seed;
    manifest["seed_source"] = seed_opt ? "flag" : "entropy";
    write_json_file((dir / "run_manifest.json").string(), manifest);
    return kExitOk;
}

int cmd_featurize(const std::string& corpus_path, const std::string& format,
                  const std::string& fit_corpus_path, const FeaturizerFlags& flags,
                  const std::string& out_path) {
    const oneshot::CorpusFormat fmt =
        format == "jsonl" ? oneshot::CorpusFormat::jsonl : oneshot::CorpusFormat::csv;
    oneshot::LoadOptions relaxed;
    relaxed.min_label_count = 1;
    const oneshot::Corpus corpus = oneshot::load_corpus(corpus_path, fmt, relaxed);

    std::vector<oneshot::Document> fit_docs = corpus.documents();
    if (!fit_corpus_path.empty()) {
        const oneshot::Corpus fit_corpus = oneshot::load_corpus(
            fit_corpus_path, oneshot::corpus_format_from_path(fit_corpus_path), relaxed);
        fit_docs = fit_corpus.documents();
    }

    const FittedFeaturizer fitted = fit_featurizer(flags.to_spec(), fit_docs);
    const oneshot::FeatureMatrix matrix = transform_featurizer(fitted, corpus.documents());
    oneshot::dump_matrix_jsonl(matrix, out_path);
    std::cout << "rows: " << matrix.rows() << "\ncols: " << matrix.cols() << "\n";

    json manifest = base_manifest("featurize");
    manifest["inputs"] = json::array({corpus_path});
    if (!fit_corpus_path.empty()) manifest["inputs"].push_back(fit_corpus_path);
    if (!flags.vectors.empty()) manifest["inputs"].push_back(flags.vectors);
    manifest["outputs"] = {out_path};
    manifest["featurizer"] = fitted.spec.to_json();
    write_json_file(out_path + ".manifest.json", manifest);
    return kExitOk;
}

int cmd_train(const std::string& corpus_path, const std::string& support_path,
              const std::string& fit_corpus_path, const std::string& fit_scope,
              std::optional<std::uint64_t> seed_opt, const FeaturizerFlags& flags,
              const std::string& model_kind, const std::string& hyperparams_json,
              const std::string& out_path) {
    if (corpus_path.empty() == support_path.empty())
        throw oneshot::Error("train: exactly one of --corpus or --support is required");

    oneshot::LoadOptions relaxed;
    relaxed.min_label_count = 1;
    const std::uint64_t seed = seed_opt ? *seed_opt : entropy_seed();

    std::vector<oneshot::Document> support_docs;
    std::vector<oneshot::Document> fit_docs;
    json split_info;
    if (!corpus_path.empty()) {
        const oneshot::Corpus corpus =
            oneshot::load_corpus(corpus_path, oneshot::corpus_format_from_path(corpus_path));
        const oneshot::OneShotSplit split = oneshot::one_shot_split(corpus, seed);
        support_docs = split.support;
        fit_docs = fit_scope == "support_only" ? split.support : corpus.documents();
        split_info["seed"] = seed;
        json ids = json::array();
        for (const auto& doc : split.support) ids.push_back(doc.id);
        split_info["support_ids"] = std::move(ids);
    } else {
        const oneshot::Corpus support = oneshot::load_corpus(
            support_path, oneshot::corpus_format_from_path(support_path), relaxed);
        support_docs = support.documents();
        if (!fit_corpus_path.empty()) {
            const oneshot::Corpus fit_corpus = oneshot::load_corpus(
                fit_corpus_path, oneshot::corpus_format_from_path(fit_corpus_path), relaxed);
            fit_docs = fit_corpus.documents();
        } else {
            fit_docs = support_docs;
        }
    }

    const FittedFeaturizer fitted = fit_featurizer(flags.to_spec(), fit_docs);
    const oneshot::FeatureMatrix x = transform_featurizer(fitted, support_docs);

    oneshot::ClassifierSpec spec;
    spec.kind = oneshot::model_kind_from_name(model_kind);
    spec.seed = seed;
    if (!hyperparams_json.empty()) {
        // reuse the grid-config hyperparameter schema
        json hp_patch = json::parse(hyperparams_json, nullptr, true);
        json model_json = {{"name", model_kind}, {"kind", model_kind}, {"hyperparams", hp_patch}};
        spec.hp = oneshot::ModelSpec::from_json(model_json).classifier.hp;
    }

    std::vector<std::string> labels;
    for (const auto& doc : support_docs) labels.push_back(doc.label);
    const oneshot::TrainedModel model = oneshot::train(spec, x, labels);

    json envelope;
    envelope["schema_version"] = 1;
    envelope["model"] = model.to_json();
    envelope["featurizer"] = featurizer_envelope(fitted);
    if (!split_info.is_null()) envelope["split"] = split_info;
    write_json_file(out_path, envelope);

    std::cout << "trained " << model_kind << " on " << support_docs.size() << " documents, "
              << model.class_labels().size() << " classes, feature_dim " << model.feature_dim()
              << "\n";
    for (const auto& warning : model.diagnostics().warnings) oneshot::log::warn(warning);

    json manifest = base_manifest("train");
    manifest["inputs"] = json::array();
    for (const std::string& p : {corpus_path, support_path, fit_corpus_path})
        if (!p.empty()) manifest["inputs"].push_back(p);
    if (!flags.vectors.empty()) manifest["inputs"].push_back(flags.vectors);
    manifest["outputs"] = {out_path};
    manifest["seed"] = seed;
    manifest["seed_source"] = seed_opt ? "flag" : "entropy";
    manifest["model_kind"] = model_kind;
    write_json_file(out_path + ".manifest.json", manifest);
    return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& corpus_path,
             const std::string& averaging, const std::string& out_path) {
    const json envelope = read_json_file(model_path);
    const oneshot::TrainedModel model = oneshot::TrainedModel::from_json(envelope.at("model"));

    oneshot::LoadOptions relaxed;
    relaxed.min_label_count = 1;
    const oneshot::Corpus corpus = oneshot::load_corpus(
        corpus_path, oneshot::corpus_format_from_path(corpus_path), relaxed);
    const FittedFeaturizer fitted =
        featurizer_from_envelope(envelope.at("featurizer"), corpus.documents());

    const oneshot::FeatureMatrix x = transform_featurizer(fitted, corpus.documents());
    const std::vector<std::string> predictions = model.predict(x);
    std::vector<std::string> truth;
    for (const auto& doc : corpus.documents()) truth.push_back(doc.label);

    const oneshot::EvalReport report = oneshot::evaluate(
        truth, predictions, model.class_labels(), oneshot::averaging_from_name(averaging));

    std::cout << "accuracy:  " << oneshot::format_fixed4(report.accuracy) << "\n"
              << "precision: " << oneshot::format_fixed4(report.precision) << "\n"
              << "recall:    " << oneshot::format_fixed4(report.recall) << "\n"
              << "f1:        " << oneshot::format_fixed4(report.f1) << "\n"
              << "(" << averaging_name(report.averaging) << " averaging, " << report.n_samples
              << " documents)\n";

    if (!out_path.empty()) {
        write_json_file(out_path, report.to_json());
        json manifest = base_manifest("eval");
        manifest["inputs"] = {model_path, corpus_path};
        manifest["outputs"] = {out_path};
        manifest["averaging"] = averaging;
        write_json_file(out_path + ".manifest.json", manifest);
    }
    return kExitOk;
}

int cmd_grid(const std::string& config_path, int jobs_override, bool single_seed) {
    const auto started = std::chrono::steady_clock::now();
    oneshot::GridConfig config = oneshot::GridConfig::load(config_path);
    if (jobs_override > 0) config.jobs = jobs_override;
    if (single_seed) config.repeats = 1;

    const oneshot::GridResult result = oneshot::run_grid(config);
    oneshot::write_grid_outputs(result, config.output_dir);

    std::size_t failed = 0;
    for (const auto& cell : result.cells) failed += cell.failed() ? 1 : 0;
    std::cout << "grid: " << result.cells.size() << " cells, " << result.cells.size() - failed
              << " ok, " << failed << " failed\n";
    for (const auto& dataset : config.datasets)
        std::cout << "  " << config.output_dir << "/" << dataset.name
                  << "/{table.csv, table.md, accuracy_bars.svg, accuracy_heatmap.svg}\n";
    std::cout << "  " << config.output_dir << "/grid.json\n";

    json manifest = base_manifest("grid");
    manifest["inputs"] = json::array({config_path});
    for (const auto& r : result.resources) manifest["inputs"].push_back(r.path);
    manifest["outputs"] = {config.output_dir + "/grid.json"};
    manifest["base_seed"] = config.base_seed;
    manifest["repeats"] = config.repeats;
    manifest["jobs"] = config.jobs;
    manifest["cells"] = result.cells.size();
    manifest["failed_cells"] = failed;
    manifest["wall_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    json timings = json::array();
    for (const auto& cell : result.cells) {
        double total = 0.0;
        for (const auto& r : cell.repeats) total += r.wall_ms;
        timings.push_back({{"cell_index", cell.cell_index}, {"wall_ms", total}});
    }
    manifest["cell_wall_ms"] = std::move(timings);
    write_json_file(config.output_dir + "/run_manifest.json", manifest);

    return failed > 0 ? kExitPartialGrid : kExitOk;
}

int cmd_report(const std::string& grid_path, const std::string& out_dir,
               const std::vector<std::string>& datasets) {
    const oneshot::GridResult result = oneshot::GridResult::from_json(read_json_file(grid_path));

    std::vector<std::string> targets = datasets;
    if (targets.empty()) {
        for (const auto& d : result.config.datasets) targets.push_back(d.name);
    }
    fs::create_directories(out_dir);
    for (const auto& name : targets) {
        const fs::path sub = fs::path(out_dir) / name;
        fs::create_directories(sub);
        oneshot::emit_table(result, name, oneshot::TableFormat::csv, (sub / "table.csv").string());
        oneshot::emit_table(result, name, oneshot::TableFormat::markdown,
                            (sub / "table.md").string());
        oneshot::emit_barchart(result, name, (sub / "accuracy_bars.svg").string());
        oneshot::emit_heatmap(result, name, (sub / "accuracy_heatmap.svg").string());
        std::cout << "wrote " << (fs::path(out_dir) / name).string() << "\n";
    }

    json manifest = base_manifest("report");
    manifest["inputs"] = {grid_path};
    manifest["outputs"] = json::array();
    for (const auto& name : targets) manifest["outputs"].push_back((fs::path(out_dir) / name).string());
    write_json_file((fs::path(out_dir) / "run_manifest.json").string(), manifest);
    return kExitOk;
}

int cmd_inspect(const std::string& path, const std::string& format, int limit,
                const std::vector<std::string>& words) {
    if (format == "docvec") {
        const oneshot::DocVectorFile file = oneshot::load_doc_vectors(path);
        std::cout << "format: document vectors (jsonl)\nentries: " << file.size()
                  << "\ndim: " << file.dim() << "\n";
        int shown = 0;
        for (const auto& id : file.ids()) {
            if (shown++ >= limit) break;
            const Eigen::VectorXd& v = *file.find(id);
            std::cout << "  " << id << ": [" << v.head(std::min<Eigen::Index>(4, v.size())).transpose()
                      << (v.size() > 4 ? " ..." : "") << "]\n";
        }
        return kExitOk;
    }

    oneshot::EmbeddingTable table;
    if (format == "glove") table = oneshot::parse_glove(path);
    else if (format == "word2vec_text") table = oneshot::parse_word2vec(path, false);
    else if (format == "word2vec_binary") table = oneshot::parse_word2vec(path, true);
    else if (format == "fasttext") table = oneshot::parse_fasttext_vec(path);
    else throw oneshot::Error("unknown format '" + format +
                              "' (glove|word2vec_text|word2vec_binary|fasttext|docvec)");

    std::cout << "format: " << format << "\nentries: " << table.size() << "\ndim: " << table.dim()
              << "\n";
    int shown = 0;
    for (const auto& token : table.tokens()) {
        if (shown++ >= limit) break;
        const Eigen::VectorXd& v = *table.find(token);
        std::cout << "  " << token << ": [" << v.head(std::min<Eigen::Index>(4, v.size())).transpose()
                  << (v.size() > 4 ? " ..." : "") << "]\n";
    }

    if (!words.empty()) {
        const oneshot::SubwordModel model(std::move(table), 3, 6, 2'000'000, 0);
        for (const auto& word : words) {
            if (model.table().find(word)) {
                std::cout << word << ": in vocabulary\n";
            } else if (auto composed = oneshot::subword_vector(model, word)) {
                std::cout << word << ": out of vocabulary, subword composition = ["
                          << composed->head(std::min<Eigen::Index>(4, composed->size())).transpose()
                          << (composed->size() > 4 ? " ..." : "") << "]"
                          << " (n=3..6, 2000000 seeded buckets)\n";
            } else {
                std::cout << word << ": no subword n-grams\n";
            }
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-shot text classification: tasks, features, classifiers, metrics, grids"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "stderr log level: debug|info|warn|error")
        ->capture_default_str();

    // split-tasks
    auto* split_tasks = app.add_subcommand(
        "split-tasks", "build the DC/DR/DCR task corpora from a three-source file");
    std::string st_source, st_format = "csv", st_out;
    bool st_force = false;
    split_tasks->add_option("source", st_source, "three-source file (id,doctor,chatgpt,rephrased)")
        ->required();
    split_tasks->add_option("--format", st_format, "source format: csv|jsonl")
        ->capture_default_str();
    split_tasks->add_option("--out-dir", st_out, "output directory")->required();
    split_tasks->add_flag("--force", st_force, "overwrite existing outputs");

    // split
    auto* split = app.add_subcommand("split", "one-shot support/query split of a corpus");
    std::string sp_corpus, sp_format = "csv", sp_out;
    std::optional<std::uint64_t> sp_seed;
    bool sp_force = false;
    split->add_option("--corpus", sp_corpus, "corpus file (id,text,label)")->required();
    split->add_option("--format", sp_format, "corpus format: csv|jsonl")->capture_default_str();
    split->add_option("--seed", sp_seed, "split seed (default: entropy, recorded in manifest)");
    split->add_option("--out-dir", sp_out, "output directory")->required();
    split->add_flag("--force", sp_force, "overwrite existing outputs");

    // featurize
    auto* featurize = app.add_subcommand("featurize", "write a feature-matrix JSONL for a corpus");
    std::string fz_corpus, fz_format = "csv", fz_fit_corpus, fz_out;
    FeaturizerFlags fz_flags;
    featurize->add_option("--corpus", fz_corpus, "corpus file")->required();
    featurize->add_option("--format", fz_format, "corpus format: csv|jsonl")->capture_default_str();
    featurize->add_option("--fit-corpus", fz_fit_corpus,
                          "corpus to fit vocabulary statistics on (default: --corpus)");
    fz_flags.attach(featurize);
    featurize->add_option("--out", fz_out, "output JSONL path")->required();

    // train
    auto* train = app.add_subcommand("train", "train one classifier on a one-shot support set");
    std::string tr_corpus, tr_support, tr_fit_corpus, tr_fit_scope = "transductive";
    std::string tr_model = "lrc", tr_hp, tr_out;
    std::optional<std::uint64_t> tr_seed;
    FeaturizerFlags tr_flags;
    train->add_option("--corpus", tr_corpus,
                      "full corpus; a one-shot split with --seed picks the support set");
    train->add_option("--support", tr_support, "explicit support-set corpus file");
    train->add_option("--fit-corpus", tr_fit_corpus,
                      "with --support: corpus to fit vocabulary statistics on");
    train->add_option("--fit-scope", tr_fit_scope,
                      "with --corpus: transductive|support_only vocabulary fitting")
        ->capture_default_str();
    train->add_option("--seed", tr_seed, "split/init seed (default: entropy, recorded)");
    tr_flags.attach(train);
    train->add_option("--model", tr_model, "classifier: lrc|rfc|svm|nbc|dtc|gbc|mlp")
        ->capture_default_str();
    train->add_option("--hyperparams", tr_hp, "hyperparameter overrides as a JSON object");
    train->add_option("--out", tr_out, "output model JSON path")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a trained model on a labeled corpus");
    std::string ev_model, ev_corpus, ev_averaging = "weighted", ev_out;
    eval->add_option("--model", ev_model, "model JSON written by train")->required();
    eval->add_option("--corpus", ev_corpus, "labeled corpus to evaluate on")->required();
    eval->add_option("--averaging", ev_averaging, "metric averaging: weighted|macro|micro")
        ->capture_default_str();
    eval->add_option("--out", ev_out, "write the full report JSON here");

    // grid
    auto* grid = app.add_subcommand("grid", "run the full dataset x featurizer x model grid");
    std::string gr_config;
    int gr_jobs = 0;
    bool gr_single_seed = false;
    grid->add_option("config", gr_config, "grid config JSON")->required();
    grid->add_option("--jobs", gr_jobs, "worker pool size (default: config, then hardware)");
    grid->add_flag("--single-seed", gr_single_seed, "one repeat: single-split tables");

    // report
    auto* report = app.add_subcommand("report", "re-emit tables and charts from a grid.json");
    std::string rp_grid, rp_out;
    std::vector<std::string> rp_datasets;
    report->add_option("--grid", rp_grid, "grid.json snapshot")->required();
    report->add_option("--out-dir", rp_out, "output directory")->required();
    report->add_option("--dataset", rp_datasets, "restrict to these datasets (repeatable)");

    // inspect-embeddings
    auto* inspect = app.add_subcommand("inspect-embeddings", "summarize an embedding file");
    std::string in_path, in_format = "glove";
    int in_limit = 5;
    std::vector<std::string> in_words;
    inspect->add_option("path", in_path, "embedding file")->required();
    inspect->add_option("--format", in_format,
                        "glove|word2vec_text|word2vec_binary|fasttext|docvec")
        ->capture_default_str();
    inspect->add_option("--limit", in_limit, "entries to print")->capture_default_str();
    inspect->add_option("--word", in_words, "look up a word (repeatable); OOV words show their "
                                            "subword composition");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    if (log_level == "debug") oneshot::log::min_level() = oneshot::log::Level::debug;
    else if (log_level == "info") oneshot::log::min_level() = oneshot::log::Level::info;
    else if (log_level == "warn") oneshot::log::min_level() = oneshot::log::Level::warn;
    else if (log_level == "error") oneshot::log::min_level() = oneshot::log::Level::error;
    else {
        oneshot::log::error("unknown log level '" + log_level + "'");
        return kExitValidation;
    }

    try {
        if (split_tasks->parsed()) return cmd_split_tasks(st_source, st_format, st_out, st_force);
        if (split->parsed()) return cmd_split(sp_corpus, sp_format, sp_seed, sp_out, sp_force);
        if (featurize->parsed())
            return cmd_featurize(fz_corpus, fz_format, fz_fit_corpus, fz_flags, fz_out);
        if (train->parsed())
            return cmd_train(tr_corpus, tr_support, tr_fit_corpus, tr_fit_scope, tr_seed, tr_flags,
                             tr_model, tr_hp, tr_out);
        if (eval->parsed()) return cmd_eval(ev_model, ev_corpus, ev_averaging, ev_out);
        if (grid->parsed()) return cmd_grid(gr_config, gr_jobs, gr_single_seed);
        if (report->parsed()) return cmd_report(rp_grid, rp_out, rp_datasets);
        if (inspect->parsed()) return cmd_inspect(in_path, in_format, in_limit, in_words);
    } catch (const oneshot::IoError& e) {
        oneshot::log::error(e.what());
        return kExitIo;
    } catch (const oneshot::Error& e) {
        oneshot::log::error(e.what());
        return kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        oneshot::log::error(e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        oneshot::log::error(e.what());
        return kExitIo;
    }
    return kExitValidation;
}
