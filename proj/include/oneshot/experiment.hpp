#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oneshot/classify.hpp"
#include "oneshot/corpus.hpp"
#include "oneshot/featurize.hpp"
#include "oneshot/metrics.hpp"

namespace oneshot {

enum class FeaturizerKind { tfidf_word, tfidf_char, word_average, doc_vectors };
enum class VectorFormat { glove, word2vec_text, word2vec_binary, fasttext };
enum class FitScope { transductive, support_only };

const char* featurizer_kind_name(FeaturizerKind kind);
FeaturizerKind featurizer_kind_from_name(const std::string& name);
const char* vector_format_name(VectorFormat format);
VectorFormat vector_format_from_name(const std::string& name);

struct FeaturizerSpec {
    std::string name;  // display name used in tables and charts
    FeaturizerKind kind = FeaturizerKind::tfidf_word;

    int n_min = 2;  // tfidf_char range
    int n_max = 4;

    std::string vectors_path;  // word_average / doc_vectors resource
    VectorFormat vector_format = VectorFormat::glove;
    // word_average: parse only tokens that occur in the corpus, trading a
    // tokenization pass for the memory of a full pretrained table
    bool restrict_vocabulary = false;

    bool subword = false;  // word_average: compose OOV words from subwords
    int subword_n_min = 3;
    int subword_n_max = 6;
    std::uint32_t subword_buckets = 2'000'000;
    std::uint64_t subword_seed = 0;
    std::string subword_sidecar;  // optional bucket-vector file

    NormConfig norm;

    nlohmann::json to_json() const;
    static FeaturizerSpec from_json(const nlohmann::json& j);
};

struct DatasetSpec {
    std::string name;
    std::string path;
    CorpusFormat format = CorpusFormat::csv;

    nlohmann::json to_json() const;
    static DatasetSpec from_json(const nlohmann::json& j);
};

struct ModelSpec {
    std::string name;  // display name
    ClassifierSpec classifier;

    nlohmann::json to_json() const;
    static ModelSpec from_json(const nlohmann::json& j);
};

struct GridConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<FeaturizerSpec> featurizers;
    std::vector<ModelSpec> models;
    int repeats = 20;
    std::uint64_t base_seed = 0;
    std::string output_dir = "out";
    Averaging averaging = Averaging::weighted;
    // Vocabulary statistics are fitted on support + query text
    // (transductively, labels never consulted); support_only restricts the
    // fit to the support documents for ablation.
    FitScope fit_scope = FitScope::transductive;
    int jobs = 0;  // worker pool size; 0 = available parallelism

    nlohmann::json to_json() const;  // canonical form, emitted for audit
    static GridConfig from_json(const nlohmann::json& j);
    static GridConfig load(const std::string& path);

    // Structural checks plus existence of every referenced resource path.
    // Fails before any cell runs.
    void validate() const;
};

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation; 0 when repeats == 1
    double min = 0.0;
    double max = 0.0;
};

struct RepeatResult {
    std::uint64_t split_seed = 0;
    EvalReport report;
    double wall_ms = 0.0;  // recorded in the run manifest, not grid.json
};

struct CellResult {
    std::size_t cell_index = 0;
    std::string dataset;
    std::string featurizer;
    std::string model;
    std::vector<RepeatResult> repeats;
    MetricStats accuracy, precision, recall, f1;
    std::string error;  // non-empty marks a failed cell; other cells still run

    bool failed() const { return !error.empty(); }
};

struct ResourceInfo {
    std::string path;
    std::string role;           // "dataset" | "vectors" | ...
    std::uint64_t bytes = 0;
    std::uint64_t entries = 0;  // documents or vector count
};

struct GridResult {
    GridConfig config;
    std::vector<CellResult> cells;  // dataset-major, then featurizer, then model
    std::vector<ResourceInfo> resources;

    bool has_failures() const;
    const CellResult* find_cell(const std::string& dataset, const std::string& featurizer,
                                const std::string& model) const;

    // Deterministic snapshot: everything except wall-clock timing, which
    // lives in the run manifest. Same config -> byte-identical file.
    nlohmann::json to_json() const;
    static GridResult from_json(const nlohmann::json& j);
};

// Runs every (dataset, featurizer, model) cell over `repeats` one-shot
// splits with split seed = base_seed + repeat. Cells execute on a worker
// pool; all seeds derive from (base_seed, cell index, repeat index), so
// results do not depend on scheduling. A cell failure is recorded in the
// cell without aborting the rest.
GridResult run_grid(const GridConfig& config);

enum class TableFormat { csv, markdown };

// One row per (model, featurizer) with mean accuracy/precision/recall/F1
// at 4 decimals; row order is model order then featurizer order.
void emit_table(const GridResult& result, const std::string& dataset,
                TableFormat format, const std::string& path);
void emit_barchart(const GridResult& result, const std::string& dataset,
                   const std::string& path);
void emit_heatmap(const GridResult& result, const std::string& dataset,
                  const std::string& path);

// Standard output tree: <dir>/<dataset>/{table.csv, table.md,
// accuracy_bars.svg, accuracy_heatmap.svg} plus <dir>/grid.json and
// <dir>/config_canonical.json.
void write_grid_outputs(const GridResult& result, const std::string& dir);

}  // namespace oneshot
