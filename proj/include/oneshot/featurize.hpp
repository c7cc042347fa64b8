#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oneshot/corpus.hpp"
#include "oneshot/embedio.hpp"
#include "oneshot/tokenize.hpp"

namespace oneshot {

// Documents-by-features matrix, sparse (term counts) or dense (embedding
// averages), with row ids aligned to the documents it came from.
class FeatureMatrix {
public:
    using SparseData = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    static FeatureMatrix dense(Eigen::MatrixXd data, std::vector<std::string> row_ids);
    static FeatureMatrix sparse(SparseData data, std::vector<std::string> row_ids);

    Eigen::Index rows() const;
    Eigen::Index cols() const;
    bool is_sparse() const { return is_sparse_; }

    const Eigen::MatrixXd& dense_data() const { return dense_; }
    const SparseData& sparse_data() const { return sparse_; }
    const std::vector<std::string>& row_ids() const { return row_ids_; }

    Eigen::VectorXd row_dense(Eigen::Index i) const;

    // X * W without densifying sparse storage.
    template <typename Derived>
    Eigen::MatrixXd multiply(const Eigen::MatrixBase<Derived>& w) const {
        return is_sparse_ ? Eigen::MatrixXd(sparse_ * w) : Eigen::MatrixXd(dense_ * w);
    }

    // Row subset in the given order (used to carve support/query views).
    FeatureMatrix select_rows(const std::vector<Eigen::Index>& indices) const;

    bool all_finite() const;

private:
    bool is_sparse_ = false;
    Eigen::MatrixXd dense_;
    SparseData sparse_;
    std::vector<std::string> row_ids_;
};

enum class Analyzer { word, character };

// Term -> contiguous column index plus the document frequencies the idf
// values were computed from. Terms are ordered lexicographically.
struct Vocabulary {
    std::map<std::string, int> term_to_index;
    std::vector<std::string> terms;            // index -> term
    std::vector<std::int64_t> document_frequency;
    std::int64_t n_docs_fitted = 0;
};

// idf[t] = ln((1 + N) / (1 + df[t])) + 1. Rows are raw term counts times
// idf, then L2-normalized (all-zero rows stay zero).
struct TfidfModel {
    Vocabulary vocabulary;
    Analyzer analyzer = Analyzer::word;
    int n_min = 2;
    int n_max = 4;  // used when analyzer == character
    NormConfig norm;
    Eigen::VectorXd idf;

    std::vector<std::string> terms_of(const Document& doc) const;
};

TfidfModel fit_tfidf(const std::vector<Document>& docs, Analyzer analyzer,
                     int n_min, int n_max, const NormConfig& cfg);
FeatureMatrix transform_tfidf(const TfidfModel& model, const std::vector<Document>& docs);

// Fitted-state round trip for reproducibility audits (vocabulary, document
// frequencies, idf).
nlohmann::json tfidf_to_json(const TfidfModel& model);
TfidfModel tfidf_from_json(const nlohmann::json& j);

struct EmbedStats {
    std::size_t documents_with_no_vector = 0;  // zero rows, flagged in run metadata
    std::size_t tokens_skipped = 0;
};

// Row = arithmetic mean of the word-token vectors. Tokens resolve through
// the table, then the subword model when given, else they are skipped.
// Documents with no resolvable tokens get the zero vector and a warning.
FeatureMatrix embed_average(const std::vector<Document>& docs, const EmbeddingTable& table,
                            const SubwordModel* subword, const NormConfig& cfg,
                            EmbedStats* stats = nullptr);

// Rows copied from the file in document order; every id must be present.
FeatureMatrix doc_vector_features(const std::vector<Document>& docs,
                                  const DocVectorFile& dvf);

// Debug dump, one JSON object per row: dense rows carry "dense", sparse
// rows carry "indices"/"values"; all rows carry "id" and "cols".
void dump_matrix_jsonl(const FeatureMatrix& matrix, const std::string& path);

}  // namespace oneshot
