#include "oneshot/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "oneshot/csv.hpp"
#include "oneshot/error.hpp"
#include "oneshot/rng.hpp"
#include "oneshot/tokenize.hpp"

namespace oneshot {

namespace {

bool is_blank(const std::string& text) {
    NormConfig collapse_only;
    collapse_only.lowercase = false;
    collapse_only.strip_accents = false;
    return normalize(text, collapse_only).empty();
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    return in;
}

struct RawRecord {
    std::vector<std::string> fields;
    std::size_t line;
};

// Reads csv records after validating the header, or jsonl objects with the
// same field names. Field order follows `header`.
std::vector<RawRecord> read_records(const std::string& path, CorpusFormat format,
                                    const std::vector<std::string>& header) {
    std::ifstream in = open_input(path);
    std::vector<RawRecord> records;

    if (format == CorpusFormat::csv) {
        csv::Reader reader(in);
        std::size_t line = 0;
        auto head = reader.next(line);
        if (!head) throw Error(path + ": empty file, expected header row");
        if (*head != header) {
            std::string expect;
            for (std::size_t i = 0; i < header.size(); ++i)
                expect += (i ? "," : "") + header[i];
            throw Error(path + ": bad header, expected '" + expect + "'");
        }
        while (auto rec = reader.next(line)) {
            if (rec->size() == 1 && (*rec)[0].empty()) continue;  // trailing blank line
            if (rec->size() != header.size()) {
                throw Error(path + ": line " + std::to_string(line) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(rec->size()));
            }
            records.push_back({std::move(*rec), line});
        }
    } else {
        std::string line_text;
        std::size_t line = 0;
        while (std::getline(in, line_text)) {
            ++line;
            if (is_blank(line_text)) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line_text);
            } catch (const nlohmann::json::exception& e) {
                throw Error(path + ": line " + std::to_string(line) + ": " + e.what());
            }
            RawRecord rec;
            rec.line = line;
            for (const auto& key : header) {
                if (!j.contains(key) || !j[key].is_string()) {
                    throw Error(path + ": line " + std::to_string(line) +
                                ": missing string field '" + key + "'");
                }
                rec.fields.push_back(j[key].get<std::string>());
            }
            records.push_back(std::move(rec));
        }
    }
    return records;
}

}  // namespace

Corpus::Corpus(std::string name, std::vector<Document> documents)
    : name_(std::move(name)), documents_(std::move(documents)) {
    std::unordered_set<std::string> seen;
    for (const auto& doc : documents_) {
        if (seen.insert(doc.label).second) labels_.push_back(doc.label);
    }
}

CorpusFormat corpus_format_from_path(const std::string& path) {
    if (path.size() >= 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0)
        return CorpusFormat::jsonl;
    return CorpusFormat::csv;
}

Corpus load_corpus(const std::string& path, CorpusFormat format, const LoadOptions& options) {
    const std::vector<std::string> header = {"id", "text", "label"};
    std::vector<RawRecord> records = read_records(path, format, header);

    std::vector<Document> docs;
    docs.reserve(records.size());
    std::unordered_map<std::string, std::size_t> id_row;
    std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> label_stats;  // count, first row

    for (const auto& rec : records) {
        const std::string& id = rec.fields[0];
        const std::string& text = rec.fields[1];
        const std::string& label = rec.fields[2];
        if (id.empty())
            throw Error(path + ": line " + std::to_string(rec.line) + ": empty id");
        auto [it, inserted] = id_row.emplace(id, rec.line);
        if (!inserted) {
            throw Error(path + ": duplicate id '" + id + "' at lines " +
                        std::to_string(it->second) + " and " + std::to_string(rec.line));
        }
        if (is_blank(text))
            throw Error(path + ": line " + std::to_string(rec.line) + ": empty text for id '" +
                        id + "'");
        if (label.empty())
            throw Error(path + ": line " + std::to_string(rec.line) + ": empty label for id '" +
                        id + "'");
        auto [lit, linserted] = label_stats.emplace(label, std::make_pair(std::size_t{0}, rec.line));
        lit->second.first++;
        (void)linserted;
        docs.push_back({id, text, label});
    }

    if (docs.empty()) throw Error(path + ": no documents");

    for (const auto& [label, stats] : label_stats) {
        if (stats.first < options.min_label_count) {
            throw Error(path + ": label '" + label + "' has only " +
                        std::to_string(stats.first) + " document(s) (first at line " +
                        std::to_string(stats.second) + "), need at least " +
                        std::to_string(options.min_label_count));
        }
    }
    return Corpus(path, std::move(docs));
}

void save_corpus_csv(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    csv::write_record(out, {"id", "text", "label"});
    for (const auto& doc : corpus.documents()) csv::write_record(out, {doc.id, doc.text, doc.label});
    if (!out) throw IoError("write failed: " + path);
}

ThreeWaySource load_three_way_source(const std::string& path, CorpusFormat format) {
    const std::vector<std::string> header = {"id", "doctor", "chatgpt", "rephrased"};
    std::vector<RawRecord> records = read_records(path, format, header);

    ThreeWaySource source;
    std::unordered_map<std::string, std::size_t> id_row;
    for (const auto& rec : records) {
        const std::string& id = rec.fields[0];
        auto [it, inserted] = id_row.emplace(id, rec.line);
        if (!inserted) {
            throw Error(path + ": duplicate id '" + id + "' at lines " +
                        std::to_string(it->second) + " and " + std::to_string(rec.line));
        }
        for (std::size_t f = 1; f < 4; ++f) {
            if (is_blank(rec.fields[f])) {
                throw Error(path + ": line " + std::to_string(rec.line) + ": empty '" +
                            header[f] + "' text for id '" + id + "'");
            }
        }
        source.rows.push_back({id, rec.fields[1], rec.fields[2], rec.fields[3]});
    }
    if (source.rows.empty()) throw Error(path + ": no rows");
    return source;
}

TaskSet build_tasks(const ThreeWaySource& source) {
    if (source.rows.empty()) throw Error("build_tasks: empty source");

    std::vector<Document> dc, dr, dcr;
    dc.reserve(source.rows.size() * 2);
    dr.reserve(source.rows.size() * 2);
    dcr.reserve(source.rows.size() * 3);
    for (const auto& row : source.rows) {
        Document doctor{row.id + "#doctor", row.doctor, "doctor"};
        Document chatgpt{row.id + "#chatgpt", row.chatgpt, "chatgpt"};
        Document rephrased{row.id + "#rephrased", row.rephrased, "rephrased"};
        dc.push_back(doctor);
        dc.push_back(chatgpt);
        dr.push_back(doctor);
        dr.push_back(rephrased);
        dcr.push_back(doctor);
        dcr.push_back(chatgpt);
        dcr.push_back(rephrased);
    }
    return {Corpus("DC", std::move(dc)), Corpus("DR", std::move(dr)),
            Corpus("DCR", std::move(dcr))};
}

OneShotSplit one_shot_split(const Corpus& corpus, std::uint64_t seed) {
    // Documents are indexed in file order; labels are visited in
    // first-appearance order. One bounded draw per label.
    std::unordered_map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < corpus.documents().size(); ++i)
        by_label[corpus.documents()[i].label].push_back(i);

    for (const auto& label : corpus.labels()) {
        if (by_label[label].size() < 2) {
            throw Error("one_shot_split: label '" + label +
                        "' has a single document; query side would be empty");
        }
    }

    Rng rng(seed);
    std::vector<bool> in_support(corpus.documents().size(), false);
    OneShotSplit split;
    split.seed = seed;
    for (const auto& label : corpus.labels()) {
        const auto& indices = by_label[label];
        const std::size_t pick = indices[rng.bounded(indices.size())];
        in_support[pick] = true;
    }
    for (std::size_t i = 0; i < corpus.documents().size(); ++i) {
        if (in_support[i]) {
            split.support.push_back(corpus.documents()[i]);
            split.support_indices.push_back(i);
        } else {
            split.query.push_back(corpus.documents()[i]);
            split.query_indices.push_back(i);
        }
    }
    return split;
}

}  // namespace oneshot
