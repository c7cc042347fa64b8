#include "oneshot/featurize.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "oneshot/error.hpp"
#include "oneshot/log.hpp"

namespace oneshot {

FeatureMatrix FeatureMatrix::dense(Eigen::MatrixXd data, std::vector<std::string> row_ids) {
    if (static_cast<std::size_t>(data.rows()) != row_ids.size())
        throw Error("FeatureMatrix: row_ids length does not match row count");
    FeatureMatrix m;
    m.is_sparse_ = false;
    m.dense_ = std::move(data);
    m.row_ids_ = std::move(row_ids);
    return m;
}

FeatureMatrix FeatureMatrix::sparse(SparseData data, std::vector<std::string> row_ids) {
    if (static_cast<std::size_t>(data.rows()) != row_ids.size())
        throw Error("FeatureMatrix: row_ids length does not match row count");
    FeatureMatrix m;
    m.is_sparse_ = true;
    m.sparse_ = std::move(data);
    m.sparse_.makeCompressed();
    m.row_ids_ = std::move(row_ids);
    return m;
}

Eigen::Index FeatureMatrix::rows() const { return is_sparse_ ? sparse_.rows() : dense_.rows(); }
Eigen::Index FeatureMatrix::cols() const { return is_sparse_ ? sparse_.cols() : dense_.cols(); }

Eigen::VectorXd FeatureMatrix::row_dense(Eigen::Index i) const {
    if (!is_sparse_) return dense_.row(i);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(sparse_.cols());
    for (SparseData::InnerIterator it(sparse_, i); it; ++it) out[it.col()] = it.value();
    return out;
}



FeatureMatrix FeatureMatrix::select_rows(const std::vector<Eigen::Index>& indices) const {
    std::vector<std::string> ids;
    ids.reserve(indices.size());
    for (Eigen::Index i : indices) ids.push_back(row_ids_[i]);

    if (!is_sparse_) {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), dense_.cols());
        for (std::size_t r = 0; r < indices.size(); ++r) out.row(r) = dense_.row(indices[r]);
        return dense(std::move(out), std::move(ids));
    }
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t r = 0; r < indices.size(); ++r) {
        for (SparseData::InnerIterator it(sparse_, indices[r]); it; ++it)
            triplets.emplace_back(static_cast<Eigen::Index>(r), it.col(), it.value());
    }
    SparseData out(static_cast<Eigen::Index>(indices.size()), sparse_.cols());
    out.setFromTriplets(triplets.begin(), triplets.end());
    return sparse(std::move(out), std::move(ids));
}

bool FeatureMatrix::all_finite() const {
    if (!is_sparse_) return dense_.allFinite();
    for (Eigen::Index i = 0; i < sparse_.outerSize(); ++i)
        for (SparseData::InnerIterator it(sparse_, i); it; ++it)
            if (!std::isfinite(it.value())) return false;
    return true;
}

std::vector<std::string> TfidfModel::terms_of(const Document& doc) const {
    if (analyzer == Analyzer::word) return word_tokenize(doc.text, norm);
    return char_ngrams(doc.text, n_min, n_max, norm);
}

TfidfModel fit_tfidf(const std::vector<Document>& docs, Analyzer analyzer, int n_min, int n_max,
                     const NormConfig& cfg) {
    if (docs.empty()) throw Error("fit_tfidf: empty corpus");

    TfidfModel model;
    model.analyzer = analyzer;
    model.n_min = n_min;
    model.n_max = n_max;
    model.norm = cfg;

    // document frequencies over distinct terms per document; std::map keeps
    // the vocabulary lexicographic, which fixes the column order
    std::map<std::string, std::int64_t> df;
    for (const auto& doc : docs) {
        std::map<std::string, bool> seen;
        for (auto& term : model.terms_of(doc)) seen.emplace(std::move(term), true);
        for (const auto& [term, _] : seen) ++df[term];
    }

    Vocabulary& vocab = model.vocabulary;
    vocab.n_docs_fitted = static_cast<std::int64_t>(docs.size());
    vocab.terms.reserve(df.size());
    vocab.document_frequency.reserve(df.size());
    model.idf.resize(static_cast<Eigen::Index>(df.size()));
    int index = 0;
    const double n_docs = static_cast<double>(docs.size());
    for (const auto& [term, count] : df) {
        vocab.term_to_index.emplace(term, index);
        vocab.terms.push_back(term);
        vocab.document_frequency.push_back(count);
        model.idf[index] = std::log((1.0 + n_docs) / (1.0 + static_cast<double>(count))) + 1.0;
        ++index;
    }
    return model;
}

FeatureMatrix transform_tfidf(const TfidfModel& model, const std::vector<Document>& docs) {
    const auto n_cols = static_cast<Eigen::Index>(model.vocabulary.terms.size());
    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<std::string> ids;
    ids.reserve(docs.size());

    for (std::size_t r = 0; r < docs.size(); ++r) {
        ids.push_back(docs[r].id);
        std::map<int, double> counts;  // column -> term count; OOV terms ignored
        for (const auto& term : model.terms_of(docs[r])) {
            auto it = model.vocabulary.term_to_index.find(term);
            if (it != model.vocabulary.term_to_index.end()) counts[it->second] += 1.0;
        }
        double sq_norm = 0.0;
        for (auto& [col, count] : counts) {
            count *= model.idf[col];
            sq_norm += count * count;
        }
        const double norm = std::sqrt(sq_norm);
        for (const auto& [col, value] : counts) {
            triplets.emplace_back(static_cast<Eigen::Index>(r), col,
                                  norm > 0.0 ? value / norm : value);
        }
    }

    FeatureMatrix::SparseData data(static_cast<Eigen::Index>(docs.size()), n_cols);
    data.setFromTriplets(triplets.begin(), triplets.end());
    return FeatureMatrix::sparse(std::move(data), std::move(ids));
}

nlohmann::json tfidf_to_json(const TfidfModel& model) {
    nlohmann::json j;
    j["analyzer"] = model.analyzer == Analyzer::word ? "word" : "char";
    j["n_min"] = model.n_min;
    j["n_max"] = model.n_max;
    j["norm"] = {{"lowercase", model.norm.lowercase},
                 {"strip_accents", model.norm.strip_accents},
                 {"collapse_whitespace", model.norm.collapse_whitespace}};
    j["n_docs_fitted"] = model.vocabulary.n_docs_fitted;
    j["terms"] = model.vocabulary.terms;
    j["document_frequency"] = model.vocabulary.document_frequency;
    nlohmann::json idf = nlohmann::json::array();
    for (Eigen::Index i = 0; i < model.idf.size(); ++i) idf.push_back(model.idf[i]);
    j["idf"] = std::move(idf);
    return j;
}

TfidfModel tfidf_from_json(const nlohmann::json& j) {
    TfidfModel model;
    model.analyzer = j.at("analyzer").get<std::string>() == "word" ? Analyzer::word
                                                                   : Analyzer::character;
    model.n_min = j.at("n_min").get<int>();
    model.n_max = j.at("n_max").get<int>();
    const auto& norm = j.at("norm");
    model.norm.lowercase = norm.at("lowercase").get<bool>();
    model.norm.strip_accents = norm.at("strip_accents").get<bool>();
    model.norm.collapse_whitespace = norm.at("collapse_whitespace").get<bool>();
    model.vocabulary.n_docs_fitted = j.at("n_docs_fitted").get<std::int64_t>();
    model.vocabulary.terms = j.at("terms").get<std::vector<std::string>>();
    model.vocabulary.document_frequency =
        j.at("document_frequency").get<std::vector<std::int64_t>>();
    for (std::size_t i = 0; i < model.vocabulary.terms.size(); ++i)
        model.vocabulary.term_to_index.emplace(model.vocabulary.terms[i], static_cast<int>(i));
    const auto& idf = j.at("idf");
    model.idf.resize(static_cast<Eigen::Index>(idf.size()));
    for (Eigen::Index i = 0; i < model.idf.size(); ++i) model.idf[i] = idf[i].get<double>();
    return model;
}

FeatureMatrix embed_average(const std::vector<Document>& docs, const EmbeddingTable& table,
                            const SubwordModel* subword, const NormConfig& cfg,
                            EmbedStats* stats) {
    if (table.size() == 0) throw Error("embed_average: empty embedding table");

    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(docs.size()),
                                                table.dim());
    std::vector<std::string> ids;
    ids.reserve(docs.size());
    EmbedStats local;

    for (std::size_t r = 0; r < docs.size(); ++r) {
        ids.push_back(docs[r].id);
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dim());
        int resolved = 0;
        for (const auto& token : word_tokenize(docs[r].text, cfg)) {
            if (const Eigen::VectorXd* hit = table.find(token)) {
                sum += *hit;
                ++resolved;
            } else if (subword) {
                if (auto composed = subword_vector(*subword, token)) {
                    sum += *composed;
                    ++resolved;
                } else {
                    ++local.tokens_skipped;
                }
            } else {
                ++local.tokens_skipped;
            }
        }
        if (resolved > 0) {
            out.row(r) = sum / static_cast<double>(resolved);
        } else {
            ++local.documents_with_no_vector;
            log::warn("embed_average: document '" + docs[r].id +
                      "' has no resolvable tokens; emitting zero vector");
        }
    }
    if (stats) *stats = local;
    return FeatureMatrix::dense(std::move(out), std::move(ids));
}

FeatureMatrix doc_vector_features(const std::vector<Document>& docs, const DocVectorFile& dvf) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(docs.size()), dvf.dim());
    std::vector<std::string> ids;
    ids.reserve(docs.size());
    for (std::size_t r = 0; r < docs.size(); ++r) {
        const Eigen::VectorXd* v = dvf.find(docs[r].id);
        if (!v) throw Error("doc_vector_features: no vector for document id '" + docs[r].id + "'");
        out.row(static_cast<Eigen::Index>(r)) = *v;
        ids.push_back(docs[r].id);
    }
    return FeatureMatrix::dense(std::move(out), std::move(ids));
}

void dump_matrix_jsonl(const FeatureMatrix& matrix, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
        nlohmann::json j;
        j["id"] = matrix.row_ids()[r];
        j["cols"] = matrix.cols();
        if (matrix.is_sparse()) {
            nlohmann::json indices = nlohmann::json::array();
            nlohmann::json values = nlohmann::json::array();
            for (FeatureMatrix::SparseData::InnerIterator it(matrix.sparse_data(), r); it; ++it) {
                indices.push_back(it.col());
                values.push_back(it.value());
            }
            j["indices"] = std::move(indices);
            j["values"] = std::move(values);
        } else {
            nlohmann::json dense = nlohmann::json::array();
            for (Eigen::Index c = 0; c < matrix.cols(); ++c) dense.push_back(matrix.dense_data()(r, c));
            j["dense"] = std::move(dense);
        }
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace oneshot
