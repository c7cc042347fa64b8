#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace oneshot {

struct Document {
    std::string id;     // unique within its corpus
    std::string text;   // non-empty after trimming
    std::string label;
};

// Labeled document collection. Documents keep file order; labels() is the
// distinct label set in first-appearance order.
class Corpus {
public:
    Corpus() = default;
    Corpus(std::string name, std::vector<Document> documents);

    const std::string& name() const { return name_; }
    const std::vector<Document>& documents() const { return documents_; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return documents_.size(); }

private:
    std::string name_;
    std::vector<Document> documents_;
    std::vector<std::string> labels_;
};

// One row of the pre-split three-source file: the same consultation
// answered by the doctor, by the chat model, and rephrased.
struct ThreeWayRow {
    std::string id;
    std::string doctor;
    std::string chatgpt;
    std::string rephrased;
};

struct ThreeWaySource {
    std::vector<ThreeWayRow> rows;
};

struct OneShotSplit {
    std::vector<Document> support;  // exactly one document per label
    std::vector<Document> query;    // everything else, file order
    std::vector<std::size_t> support_indices;  // positions in the parent corpus
    std::vector<std::size_t> query_indices;
    std::uint64_t seed = 0;
};

enum class CorpusFormat { csv, jsonl };

struct LoadOptions {
    // Minimum documents per label. The default enforces that a one-shot
    // split leaves a non-empty query side; support-set files written by
    // `split` are re-read with min_label_count = 1.
    std::size_t min_label_count = 2;
};

CorpusFormat corpus_format_from_path(const std::string& path);

Corpus load_corpus(const std::string& path, CorpusFormat format,
                   const LoadOptions& options = {});
void save_corpus_csv(const Corpus& corpus, const std::string& path);

ThreeWaySource load_three_way_source(const std::string& path, CorpusFormat format);

struct TaskSet {
    Corpus dc;   // doctor vs chatgpt, 2 labels
    Corpus dr;   // doctor vs rephrased, 2 labels
    Corpus dcr;  // all three sources, 3 labels
};

TaskSet build_tasks(const ThreeWaySource& source);

// Per label (first-appearance order) picks one document uniformly at
// random into the support set; everything else becomes the query set.
// Pure function of (corpus content, seed).
OneShotSplit one_shot_split(const Corpus& corpus, std::uint64_t seed);

}  // namespace oneshot
