#include "oneshot/embedio.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string_view>

#include <json.hpp>

#include "oneshot/error.hpp"
#include "oneshot/numformat.hpp"
#include "oneshot/rng.hpp"
#include "oneshot/tokenize.hpp"

namespace oneshot {

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    return out;
}

double parse_float(std::string_view token, const std::string& path, std::size_t line) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw Error(path + ": line " + std::to_string(line) + ": unparsable float '" +
                    std::string(token) + "'");
    }
    if (!std::isfinite(value)) {
        throw Error(path + ": line " + std::to_string(line) + ": non-finite value '" +
                    std::string(token) + "'");
    }
    return value;
}

// token then dim space-separated decimal floats
void parse_vector_line(const std::string& line_text, const std::string& path, std::size_t line,
                       int expected_dim, std::string& token, Eigen::VectorXd& vector) {
    std::size_t pos = line_text.find(' ');
    if (pos == std::string::npos || pos == 0) {
        throw Error(path + ": line " + std::to_string(line) + ": expected 'token v1 v2 ...'");
    }
    token = line_text.substr(0, pos);

    // count remaining fields first so dimension errors name the line
    int count = 0;
    for (std::size_t i = pos; i < line_text.size();) {
        while (i < line_text.size() && line_text[i] == ' ') ++i;
        if (i >= line_text.size()) break;
        ++count;
        while (i < line_text.size() && line_text[i] != ' ') ++i;
    }
    if (expected_dim > 0 && count != expected_dim) {
        throw Error(path + ": line " + std::to_string(line) + ": expected " +
                    std::to_string(expected_dim) + " values, got " + std::to_string(count));
    }
    if (count == 0) {
        throw Error(path + ": line " + std::to_string(line) + ": no vector values");
    }

    vector.resize(count);
    int k = 0;
    for (std::size_t i = pos; i < line_text.size();) {
        while (i < line_text.size() && line_text[i] == ' ') ++i;
        if (i >= line_text.size()) break;
        std::size_t end = i;
        while (end < line_text.size() && line_text[end] != ' ') ++end;
        vector[k++] = parse_float({line_text.data() + i, end - i}, path, line);
        i = end;
    }
}

std::string chomp(std::string line_text) {
    if (!line_text.empty() && line_text.back() == '\r') line_text.pop_back();
    return line_text;
}

EmbeddingTable parse_text_vectors(const std::string& path, EmbeddingSource kind,
                                  bool with_header, const ParseOptions& opt) {
    std::ifstream in = open_input(path);
    std::string line_text;
    std::size_t line = 0;

    long declared_count = -1;
    int dim = 0;
    if (with_header) {
        if (!std::getline(in, line_text)) throw Error(path + ": empty file");
        ++line;
        line_text = chomp(line_text);
        long cnt = 0;
        int d = 0;
        if (std::sscanf(line_text.c_str(), "%ld %d", &cnt, &d) != 2 || cnt < 0 || d <= 0) {
            throw Error(path + ": line 1: expected header '<vocab_count> <dim>'");
        }
        declared_count = cnt;
        dim = d;
    }

    EmbeddingTable table(dim, kind);
    long parsed = 0;
    std::string token;
    Eigen::VectorXd vector;
    while (std::getline(in, line_text)) {
        ++line;
        line_text = chomp(line_text);
        if (line_text.empty()) continue;
        parse_vector_line(line_text, path, line, dim, token, vector);
        if (dim == 0) {  // inferred from the first line (glove has no header)
            dim = static_cast<int>(vector.size());
            table = EmbeddingTable(dim, kind);
        }
        ++parsed;
        if (declared_count >= 0 && parsed > declared_count) {
            throw Error(path + ": line " + std::to_string(line) + ": more entries than the " +
                        "declared count " + std::to_string(declared_count));
        }
        if (opt.restrict_to && !opt.restrict_to->count(token)) continue;
        try {
            table.insert(token, vector);
        } catch (const Error& e) {
            throw Error(path + ": line " + std::to_string(line) + ": " + e.what());
        }
    }
    if (declared_count >= 0 && parsed != declared_count) {
        throw Error(path + ": truncated: header declares " + std::to_string(declared_count) +
                    " entries, found " + std::to_string(parsed));
    }
    if (dim == 0) throw Error(path + ": no vector entries");
    return table;
}

float read_f32_le(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (!in) throw Error("truncated binary payload");
    const std::uint32_t u = static_cast<std::uint32_t>(bytes[0]) |
                            (static_cast<std::uint32_t>(bytes[1]) << 8) |
                            (static_cast<std::uint32_t>(bytes[2]) << 16) |
                            (static_cast<std::uint32_t>(bytes[3]) << 24);
    return std::bit_cast<float>(u);
}

void write_f32_le(std::ostream& out, float value) {
    const auto u = std::bit_cast<std::uint32_t>(value);
    const char bytes[4] = {static_cast<char>(u & 0xFF), static_cast<char>((u >> 8) & 0xFF),
                           static_cast<char>((u >> 16) & 0xFF),
                           static_cast<char>((u >> 24) & 0xFF)};
    out.write(bytes, 4);
}

}  // namespace

void EmbeddingTable::insert(const std::string& token, Eigen::VectorXd vector) {
    if (dim_ == 0) dim_ = static_cast<int>(vector.size());
    if (vector.size() != dim_) {
        throw Error("vector for '" + token + "' has dimension " +
                    std::to_string(vector.size()) + ", table has " + std::to_string(dim_));
    }
    if (!vector.allFinite()) throw Error("non-finite vector for '" + token + "'");
    auto [it, inserted] = entries_.emplace(token, std::move(vector));
    (void)it;
    if (!inserted) throw Error("duplicate token '" + token + "'");
    order_.push_back(token);
}

const Eigen::VectorXd* EmbeddingTable::find(const std::string& token) const {
    auto it = entries_.find(token);
    return it == entries_.end() ? nullptr : &it->second;
}

EmbeddingTable parse_glove(const std::string& path, const ParseOptions& opt) {
    return parse_text_vectors(path, EmbeddingSource::glove, /*with_header=*/false, opt);
}

EmbeddingTable parse_fasttext_vec(const std::string& path, const ParseOptions& opt) {
    return parse_text_vectors(path, EmbeddingSource::fasttext, /*with_header=*/true, opt);
}

EmbeddingTable parse_word2vec(const std::string& path, bool binary, const ParseOptions& opt) {
    if (!binary) return parse_text_vectors(path, EmbeddingSource::word2vec, true, opt);

    std::ifstream in = open_input(path);
    std::string header;
    if (!std::getline(in, header)) throw Error(path + ": empty file");
    long count = 0;
    int dim = 0;
    if (std::sscanf(header.c_str(), "%ld %d", &count, &dim) != 2 || count < 0 || dim <= 0) {
        throw Error(path + ": expected header '<vocab_count> <dim>'");
    }

    EmbeddingTable table(dim, EmbeddingSource::word2vec);
    for (long e = 0; e < count; ++e) {
        std::string token;
        int c;
        while ((c = in.get()) != std::char_traits<char>::eof() && c == '\n') {
        }
        if (c == std::char_traits<char>::eof()) {
            throw Error(path + ": truncated: header declares " + std::to_string(count) +
                        " entries, found " + std::to_string(e));
        }
        while (c != ' ' && c != std::char_traits<char>::eof()) {
            token.push_back(static_cast<char>(c));
            c = in.get();
        }
        if (c == std::char_traits<char>::eof())
            throw Error(path + ": truncated binary payload in entry " + std::to_string(e + 1));

        Eigen::VectorXd vector(dim);
        try {
            for (int k = 0; k < dim; ++k) vector[k] = static_cast<double>(read_f32_le(in));
        } catch (const Error&) {
            throw Error(path + ": truncated binary payload in entry " + std::to_string(e + 1) +
                        " ('" + token + "')");
        }
        if (!vector.allFinite())
            throw Error(path + ": non-finite value in entry '" + token + "'");
        if (opt.restrict_to && !opt.restrict_to->count(token)) continue;
        table.insert(token, std::move(vector));
    }
    return table;
}

void write_glove(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out = open_output(path);
    for (const auto& token : table.tokens()) {
        const Eigen::VectorXd& v = *table.find(token);
        out << token;
        for (Eigen::Index k = 0; k < v.size(); ++k) out << ' ' << format_double(v[k]);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_word2vec(const EmbeddingTable& table, const std::string& path, bool binary) {
    std::ofstream out = open_output(path);
    out << table.size() << ' ' << table.dim() << '\n';
    for (const auto& token : table.tokens()) {
        const Eigen::VectorXd& v = *table.find(token);
        if (binary) {
            out << token << ' ';
            for (Eigen::Index k = 0; k < v.size(); ++k)
                write_f32_le(out, static_cast<float>(v[k]));
            out << '\n';
        } else {
            out << token;
            for (Eigen::Index k = 0; k < v.size(); ++k) out << ' ' << format_double(v[k]);
            out << '\n';
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

std::uint32_t fnv1a32(const std::string& bytes) {
    std::uint32_t hash = 2166136261u;
    for (unsigned char byte : bytes) {
        hash ^= byte;
        hash *= 16777619u;
    }
    return hash;
}

SubwordModel::SubwordModel(EmbeddingTable table, int n_min, int n_max,
                           std::uint32_t bucket_count, std::uint64_t bucket_seed)
    : table_(std::move(table)), n_min_(n_min), n_max_(n_max), bucket_count_(bucket_count),
      bucket_seed_(bucket_seed) {
    if (bucket_count_ == 0) throw Error("SubwordModel: bucket_count must be positive");
    if (n_min_ < 1 || n_min_ > n_max_ || n_max_ > 8)
        throw Error("SubwordModel: invalid subword n range");
}

SubwordModel SubwordModel::with_sidecar(EmbeddingTable table, int n_min, int n_max,
                                        const std::string& sidecar_path) {
    EmbeddingTable buckets = parse_word2vec(sidecar_path, /*binary=*/false);
    if (buckets.dim() != table.dim()) {
        throw Error(sidecar_path + ": bucket dimension " + std::to_string(buckets.dim()) +
                    " does not match table dimension " + std::to_string(table.dim()));
    }
    SubwordModel model(std::move(table), n_min, n_max,
                       static_cast<std::uint32_t>(buckets.size()), 0);
    model.explicit_buckets_.resize(buckets.size());
    for (std::uint32_t b = 0; b < buckets.size(); ++b) {
        const Eigen::VectorXd* v = buckets.find(std::to_string(b));
        if (!v) throw Error(sidecar_path + ": missing bucket token '" + std::to_string(b) + "'");
        model.explicit_buckets_[b] = *v;
    }
    return model;
}

Eigen::VectorXd SubwordModel::bucket_vector(std::uint32_t bucket) const {
    if (!explicit_buckets_.empty()) return explicit_buckets_[bucket];
    // Seeded mode: unit-norm vector derived from (seed, bucket index),
    // never materialized as a table.
    Rng rng(derive_seed(bucket_seed_, bucket));
    Eigen::VectorXd v(table_.dim());
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = rng.uniform(-1.0, 1.0);
    const double norm = v.norm();
    if (norm > 0.0) v /= norm;
    else v[0] = 1.0;
    return v;
}

std::optional<Eigen::VectorXd> subword_vector(const SubwordModel& model,
                                              const std::string& word) {
    if (const Eigen::VectorXd* hit = model.table().find(word)) return *hit;

    NormConfig raw;  // the word is already a token; no further normalization
    raw.lowercase = false;
    raw.strip_accents = false;
    raw.collapse_whitespace = false;
    const std::vector<std::string> grams =
        char_ngrams("<" + word + ">", model.n_min(), model.n_max(), raw);
    if (grams.empty()) return std::nullopt;

    std::vector<std::uint32_t> buckets;
    buckets.reserve(grams.size());
    for (const auto& gram : grams) buckets.push_back(fnv1a32(gram) % model.bucket_count());

    // all n-grams in one bucket: the mean of identical vectors is that
    // vector, returned without a divide so the identity is exact
    if (std::adjacent_find(buckets.begin(), buckets.end(), std::not_equal_to<>()) == buckets.end())
        return model.bucket_vector(buckets.front());

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(model.table().dim());
    for (std::uint32_t bucket : buckets) sum += model.bucket_vector(bucket);
    return sum / static_cast<double>(buckets.size());
}

void DocVectorFile::insert(const std::string& id, Eigen::VectorXd vector) {
    if (dim_ == 0) dim_ = static_cast<int>(vector.size());
    if (vector.size() != dim_) {
        throw Error("vector for id '" + id + "' has dimension " +
                    std::to_string(vector.size()) + ", file has " + std::to_string(dim_));
    }
    if (!vector.allFinite()) throw Error("non-finite value for id '" + id + "'");
    auto [it, inserted] = rows_.emplace(id, std::move(vector));
    (void)it;
    if (!inserted) throw Error("duplicate id '" + id + "'");
    order_.push_back(id);
}

const Eigen::VectorXd* DocVectorFile::find(const std::string& id) const {
    auto it = rows_.find(id);
    return it == rows_.end() ? nullptr : &it->second;
}

DocVectorFile load_doc_vectors(const std::string& path) {
    std::ifstream in = open_input(path);
    DocVectorFile file;
    std::string line_text;
    std::size_t line = 0;
    while (std::getline(in, line_text)) {
        ++line;
        if (line_text.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line_text);
        } catch (const nlohmann::json::exception& e) {
            throw Error(path + ": line " + std::to_string(line) + ": " + e.what());
        }
        if (!j.contains("id") || !j["id"].is_string() || !j.contains("vector") ||
            !j["vector"].is_array()) {
            throw Error(path + ": line " + std::to_string(line) +
                        ": expected {\"id\": str, \"vector\": [floats]}");
        }
        const auto id = j["id"].get<std::string>();
        Eigen::VectorXd v(j["vector"].size());
        Eigen::Index k = 0;
        for (const auto& x : j["vector"]) {
            if (!x.is_number())
                throw Error(path + ": line " + std::to_string(line) + ": non-numeric value for id '" +
                            id + "'");
            v[k++] = x.get<double>();
        }
        try {
            file.insert(id, std::move(v));
        } catch (const Error& e) {
            throw Error(path + ": line " + std::to_string(line) + ": " + e.what());
        }
    }
    if (file.size() == 0) throw Error(path + ": no rows");
    return file;
}

void write_doc_vectors(const DocVectorFile& file, const std::string& path) {
    std::ofstream out = open_output(path);
    for (const auto& id : file.ids()) {
        const Eigen::VectorXd& v = *file.find(id);
        nlohmann::json j;
        j["id"] = id;
        nlohmann::json arr = nlohmann::json::array();
        for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(v[k]);
        j["vector"] = std::move(arr);
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace oneshot
