#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace oneshot {

enum class EmbeddingSource { glove, word2vec, fasttext };

// Token -> vector map parsed from a pretrained-vector file. All vectors
// share dim() and are finite; parsers reject anything else.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(int dim, EmbeddingSource kind) : dim_(dim), kind_(kind) {}

    int dim() const { return dim_; }
    EmbeddingSource source_kind() const { return kind_; }
    std::size_t size() const { return entries_.size(); }

    // Throws on duplicate token or dimension/finiteness violation.
    void insert(const std::string& token, Eigen::VectorXd vector);

    const Eigen::VectorXd* find(const std::string& token) const;
    const std::vector<std::string>& tokens() const { return order_; }

private:
    int dim_ = 0;
    EmbeddingSource kind_ = EmbeddingSource::glove;
    std::unordered_map<std::string, Eigen::VectorXd> entries_;
    std::vector<std::string> order_;  // insertion order, keeps writers stable
};

struct ParseOptions {
    // When set, only these tokens are materialized (saves memory on
    // full-size pretrained files); header counts are still validated.
    const std::unordered_set<std::string>* restrict_to = nullptr;
};

EmbeddingTable parse_glove(const std::string& path, const ParseOptions& opt = {});
EmbeddingTable parse_word2vec(const std::string& path, bool binary,
                              const ParseOptions& opt = {});
EmbeddingTable parse_fasttext_vec(const std::string& path, const ParseOptions& opt = {});

void write_glove(const EmbeddingTable& table, const std::string& path);
void write_word2vec(const EmbeddingTable& table, const std::string& path, bool binary);

// FNV-1a 32-bit over UTF-8 bytes; fixed hash for subword buckets.
std::uint32_t fnv1a32(const std::string& bytes);

// fastText-style subword composition. Bucket vectors either come from a
// sidecar file or are derived lazily from (seed, bucket index): unit-norm,
// deterministic, never materialized as a whole (bucket_count defaults to
// 2'000'000).
class SubwordModel {
public:
    SubwordModel(EmbeddingTable table, int n_min, int n_max,
                 std::uint32_t bucket_count, std::uint64_t bucket_seed);

    // Buckets loaded from a word2vec-text sidecar whose tokens are the
    // bucket indices "0".."count-1".
    static SubwordModel with_sidecar(EmbeddingTable table, int n_min, int n_max,
                                     const std::string& sidecar_path);

    const EmbeddingTable& table() const { return table_; }
    int n_min() const { return n_min_; }
    int n_max() const { return n_max_; }
    std::uint32_t bucket_count() const { return bucket_count_; }

    Eigen::VectorXd bucket_vector(std::uint32_t bucket) const;

private:
    EmbeddingTable table_;
    int n_min_;
    int n_max_;
    std::uint32_t bucket_count_;
    std::uint64_t bucket_seed_ = 0;
    std::vector<Eigen::VectorXd> explicit_buckets_;  // empty => seeded mode
};

// In-vocabulary words return their stored vector. An OOV word is wrapped in
// angle brackets, its character n-grams of lengths n_min..n_max are hashed
// with FNV-1a modulo bucket_count, and the mean of the selected bucket
// vectors is returned. Absent only when the wrapped word yields no n-grams.
std::optional<Eigen::VectorXd> subword_vector(const SubwordModel& model,
                                              const std::string& word);

// Precomputed per-document contextual vectors (the stand-in for the
// transformer embeddings, which are produced outside this artifact).
class DocVectorFile {
public:
    int dim() const { return dim_; }
    std::size_t size() const { return rows_.size(); }
    const Eigen::VectorXd* find(const std::string& id) const;
    const std::vector<std::string>& ids() const { return order_; }

    void insert(const std::string& id, Eigen::VectorXd vector);

private:
    int dim_ = 0;
    std::unordered_map<std::string, Eigen::VectorXd> rows_;
    std::vector<std::string> order_;
};

// JSONL rows {"id": str, "vector": [floats]}.
DocVectorFile load_doc_vectors(const std::string& path);
void write_doc_vectors(const DocVectorFile& file, const std::string& path);

}  // namespace oneshot
