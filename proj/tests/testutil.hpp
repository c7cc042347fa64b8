#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oneshot/corpus.hpp"
#include "oneshot/embedio.hpp"
#include "oneshot/experiment.hpp"
#include "oneshot/rng.hpp"

namespace testutil {

class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "oneshot-test-XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
        path_ = buf.data();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read failed: " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Two-class corpus from disjoint vocabulary templates: every class-A
// document samples words only from the A word list, so a support document
// shares terms with its class and none with the other.
inline oneshot::Corpus disjoint_vocab_corpus(std::size_t docs_per_class, int words_per_doc,
                                             std::uint64_t seed) {
    const std::vector<std::string> vocab_a = {"rest",     "fluids",   "dosage",  "clinic",
                                              "symptom",  "exam",     "fever",   "pressure",
                                              "tablet",   "recovery", "monitor", "therapy"};
    const std::vector<std::string> vocab_b = {"kindly",  "certainly", "general",  "provider",
                                              "consult", "informed",  "consider", "options",
                                              "support", "wellness",  "guidance", "resources"};
    oneshot::Rng rng(seed);
    std::vector<oneshot::Document> docs;
    for (std::size_t i = 0; i < docs_per_class * 2; ++i) {
        const bool is_a = i % 2 == 0;
        const auto& vocab = is_a ? vocab_a : vocab_b;
        std::string text;
        for (int w = 0; w < words_per_doc; ++w) {
            if (w) text += ' ';
            text += vocab[rng.bounded(vocab.size())];
        }
        docs.push_back({"d" + std::to_string(i), text, is_a ? "human" : "machine"});
    }
    return oneshot::Corpus("synthetic", std::move(docs));
}

// Three disjoint vocabulary templates, one per source. Texts sampled from
// them make DC/DR/DCR tasks separable enough for one-shot classification.
inline const std::vector<std::vector<std::string>>& toy_vocabularies() {
    static const std::vector<std::vector<std::string>> vocabs = {
        {"rest", "fluids", "dosage", "clinic", "symptom", "plasma", "fever", "tablet", "injury",
         "therapy", "triage", "biopsy"},
        {"kindly", "certainly", "general", "provider", "consult", "informed", "consider",
         "options", "reaching", "wellness", "guidance", "sharing"},
        {"advise", "hydrate", "medicine", "observe", "signals", "facility", "checkup",
         "regimen", "recovery", "pressure", "schedule", "balance"}};
    return vocabs;
}

struct ToyGridFiles {
    std::string dc_csv, dr_csv, dcr_csv;
    std::string glove_txt, w2v_txt, w2v_bin, fasttext_vec, docvec_jsonl;
};

// Writes three task corpora plus every embedding resource the six
// featurizer families consume. Word vectors are class-informative (class
// base direction + noise) so dense featurizers separate too.
inline ToyGridFiles write_toy_grid_files(const TempDir& dir, int rows_per_source,
                                         std::uint64_t seed) {
    using namespace oneshot;
    const auto& vocabs = toy_vocabularies();
    Rng rng(seed);

    auto sample_text = [&](std::size_t which) {
        std::string text;
        for (int w = 0; w < 10; ++w) {
            if (w) text += ' ';
            text += vocabs[which][rng.bounded(vocabs[which].size())];
        }
        return text;
    };

    ThreeWaySource source;
    for (int i = 0; i < rows_per_source; ++i) {
        source.rows.push_back({"row" + std::to_string(i), sample_text(0), sample_text(1),
                               sample_text(2)});
    }
    const TaskSet tasks = build_tasks(source);

    ToyGridFiles files;
    files.dc_csv = dir.file("dc.csv");
    files.dr_csv = dir.file("dr.csv");
    files.dcr_csv = dir.file("dcr.csv");
    save_corpus_csv(tasks.dc, files.dc_csv);
    save_corpus_csv(tasks.dr, files.dr_csv);
    save_corpus_csv(tasks.dcr, files.dcr_csv);

    const int dim = 10;
    EmbeddingTable table(dim, EmbeddingSource::glove);
    for (std::size_t which = 0; which < vocabs.size(); ++which) {
        for (const auto& word : vocabs[which]) {
            Eigen::VectorXd v(dim);
            for (int k = 0; k < dim; ++k) v[k] = rng.uniform(-0.2, 0.2);
            v[which] += 1.0;  // class base direction
            table.insert(word, std::move(v));
        }
    }
    files.glove_txt = dir.file("vectors.glove.txt");
    files.w2v_txt = dir.file("vectors.w2v.txt");
    files.w2v_bin = dir.file("vectors.w2v.bin");
    files.fasttext_vec = dir.file("vectors.ft.vec");
    write_glove(table, files.glove_txt);
    write_word2vec(table, files.w2v_txt, false);
    write_word2vec(table, files.w2v_bin, true);
    write_word2vec(table, files.fasttext_vec, false);

    DocVectorFile docvecs;
    for (const auto& doc : tasks.dcr.documents()) {
        const std::size_t which = doc.label == "doctor" ? 0 : (doc.label == "chatgpt" ? 1 : 2);
        Eigen::VectorXd v(6);
        for (int k = 0; k < 6; ++k) v[k] = rng.uniform(-0.3, 0.3);
        v[which] += 1.0;
        docvecs.insert(doc.id, std::move(v));
    }
    files.docvec_jsonl = dir.file("docvecs.jsonl");
    write_doc_vectors(docvecs, files.docvec_jsonl);
    return files;
}

// The full reporting grid: 3 datasets x 6 featurizer families x 7 models.
inline oneshot::GridConfig toy_grid_config(const ToyGridFiles& files, const std::string& out_dir,
                                           int repeats, std::uint64_t base_seed) {
    using namespace oneshot;
    GridConfig config;
    config.datasets = {{"DC", files.dc_csv, CorpusFormat::csv},
                       {"DR", files.dr_csv, CorpusFormat::csv},
                       {"DCR", files.dcr_csv, CorpusFormat::csv}};

    FeaturizerSpec bow;
    bow.name = "BoW + TF-IDF";
    bow.kind = FeaturizerKind::tfidf_word;
    FeaturizerSpec chars;
    chars.name = "Character n-grams";
    chars.kind = FeaturizerKind::tfidf_char;
    chars.n_min = 2;
    chars.n_max = 4;
    FeaturizerSpec w2v;
    w2v.name = "Word2Vec";
    w2v.kind = FeaturizerKind::word_average;
    w2v.vectors_path = files.w2v_bin;
    w2v.vector_format = VectorFormat::word2vec_binary;
    FeaturizerSpec glove;
    glove.name = "GloVe";
    glove.kind = FeaturizerKind::word_average;
    glove.vectors_path = files.glove_txt;
    glove.vector_format = VectorFormat::glove;
    FeaturizerSpec fasttext;
    fasttext.name = "fastText";
    fasttext.kind = FeaturizerKind::word_average;
    fasttext.vectors_path = files.fasttext_vec;
    fasttext.vector_format = VectorFormat::fasttext;
    fasttext.subword = true;
    fasttext.subword_buckets = 5000;  // keep the toy run light
    FeaturizerSpec gpt2;
    gpt2.name = "GPT2 Embedding";
    gpt2.kind = FeaturizerKind::doc_vectors;
    gpt2.vectors_path = files.docvec_jsonl;
    config.featurizers = {bow, chars, w2v, glove, fasttext, gpt2};

    auto model = [](const std::string& name, ModelKind kind) {
        ModelSpec spec;
        spec.name = name;
        spec.classifier.kind = kind;
        return spec;
    };
    config.models = {model("LRC", ModelKind::lrc), model("RFC", ModelKind::rfc),
                     model("SVM", ModelKind::svm), model("NBC", ModelKind::nbc),
                     model("DTC", ModelKind::dtc), model("GBC", ModelKind::gbc),
                     model("MLP", ModelKind::mlp)};

    config.repeats = repeats;
    config.base_seed = base_seed;
    config.output_dir = out_dir;
    config.jobs = 2;
    return config;
}

// Minimal XML well-formedness check: tags balance, attribute values are
// quoted, no stray '<' or '>'. Enough to act as an oracle for the SVG
// emitters without an XML library.
inline bool well_formed_xml(const std::string& text, std::string* error = nullptr) {
    auto fail = [&](const std::string& msg) {
        if (error) *error = msg;
        return false;
    };
    std::vector<std::string> stack;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const char c = text[i];
        if (c == '>') return fail("stray '>' at " + std::to_string(i));
        if (c != '<') {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        if (j < n && text[j] == '?') {  // declaration
            while (j + 1 < n && !(text[j] == '?' && text[j + 1] == '>')) ++j;
            if (j + 1 >= n) return fail("unterminated declaration");
            i = j + 2;
            continue;
        }
        const bool closing = j < n && text[j] == '/';
        if (closing) ++j;
        std::size_t name_start = j;
        while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == ':' ||
                         text[j] == '-' || text[j] == '_'))
            ++j;
        if (j == name_start) return fail("empty tag name at " + std::to_string(i));
        const std::string name = text.substr(name_start, j - name_start);

        // scan attributes to the tag end, honoring quotes
        bool self_closing = false;
        while (j < n && text[j] != '>') {
            if (text[j] == '"') {
                ++j;
                while (j < n && text[j] != '"') ++j;
                if (j >= n) return fail("unterminated attribute value");
            } else if (text[j] == '<') {
                return fail("nested '<' in tag");
            } else if (text[j] == '/' && j + 1 < n && text[j + 1] == '>') {
                self_closing = true;
            }
            ++j;
        }
        if (j >= n) return fail("unterminated tag '" + name + "'");
        if (closing) {
            if (stack.empty() || stack.back() != name)
                return fail("mismatched closing tag '" + name + "'");
            stack.pop_back();
        } else if (!self_closing) {
            stack.push_back(name);
        }
        i = j + 1;
    }
    if (!stack.empty()) return fail("unclosed tag '" + stack.back() + "'");
    return true;
}

// All occurrences of an attribute value among tags whose attributes contain
// `filter` (e.g. heights of class="bar" rects).
inline std::vector<std::string> attribute_values(const std::string& svg, const std::string& filter,
                                                 const std::string& attribute) {
    std::vector<std::string> values;
    std::size_t pos = 0;
    while ((pos = svg.find('<', pos)) != std::string::npos) {
        const std::size_t end = svg.find('>', pos);
        if (end == std::string::npos) break;
        const std::string tag = svg.substr(pos, end - pos);
        if (tag.find(filter) != std::string::npos) {
            const std::string needle = attribute + "=\"";
            const std::size_t a = tag.find(needle);
            if (a != std::string::npos) {
                const std::size_t b = tag.find('"', a + needle.size());
                values.push_back(tag.substr(a + needle.size(), b - a - needle.size()));
            }
        }
        pos = end + 1;
    }
    return values;
}

// Text bodies of elements whose opening tag contains `filter`
// (e.g. <text class="cell-label" ...>BODY</text>).
inline std::vector<std::string> element_bodies(const std::string& svg, const std::string& filter) {
    std::vector<std::string> bodies;
    std::size_t pos = 0;
    while ((pos = svg.find("<text", pos)) != std::string::npos) {
        const std::size_t end = svg.find('>', pos);
        if (end == std::string::npos) break;
        const std::string tag = svg.substr(pos, end - pos);
        if (tag.find(filter) != std::string::npos) {
            const std::size_t close = svg.find("</text>", end);
            if (close != std::string::npos) bodies.push_back(svg.substr(end + 1, close - end - 1));
        }
        pos = end + 1;
    }
    return bodies;
}

}  // namespace testutil
