#include "oneshot/metrics.hpp"

#include <unordered_map>

#include "oneshot/error.hpp"

namespace oneshot {

const char* averaging_name(Averaging mode) {
    switch (mode) {
        case Averaging::weighted: return "weighted";
        case Averaging::macro: return "macro";
        case Averaging::micro: return "micro";
    }
    return "weighted";
}

Averaging averaging_from_name(const std::string& name) {
    if (name == "weighted") return Averaging::weighted;
    if (name == "macro") return Averaging::macro;
    if (name == "micro") return Averaging::micro;
    throw Error("unknown averaging mode '" + name + "' (weighted|macro|micro)");
}

namespace {

// One per-class metric as exact integer counts. Keeping the rational form
// until the last moment lets weighted averaging do a single correctly
// rounded division per class: recall terms (support * TP) / support are
// then exact integers, so the weighted-recall == accuracy identity holds
// bit for bit instead of within an ulp.
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 0;

    double value(int* zero_divisions) const {
        if (den == 0) {
            if (zero_divisions) ++*zero_divisions;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    }
};

double aggregate(const std::vector<Fraction>& fractions, const std::vector<std::int64_t>& weights,
                 Averaging mode, std::int64_t n_samples) {
    const std::size_t k = fractions.size();
    switch (mode) {
        case Averaging::weighted: {
            double sum = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                if (fractions[c].den == 0 || weights[c] == 0) continue;
                sum += static_cast<double>(weights[c] * fractions[c].num) /
                       static_cast<double>(fractions[c].den);
            }
            return n_samples > 0 ? sum / static_cast<double>(n_samples) : 0.0;
        }
        case Averaging::macro: {
            double sum = 0.0;
            for (const auto& f : fractions) sum += f.value(nullptr);
            return k > 0 ? sum / static_cast<double>(k) : 0.0;
        }
        case Averaging::micro: {
            std::int64_t num = 0, den = 0;
            for (const auto& f : fractions) {
                num += f.num;
                den += f.den;
            }
            return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
        }
    }
    return 0.0;
}

}  // namespace

EvalReport evaluate(const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred,
                    const std::vector<std::string>& label_order, Averaging averaging) {
    if (y_true.size() != y_pred.size())
        throw Error("evaluate: y_true has " + std::to_string(y_true.size()) + " labels, y_pred has " +
                    std::to_string(y_pred.size()));
    if (y_true.empty()) throw Error("evaluate: empty input");
    if (label_order.empty()) throw Error("evaluate: empty label order");

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < label_order.size(); ++c) {
        if (!index.emplace(label_order[c], c).second)
            throw Error("evaluate: duplicate label '" + label_order[c] + "' in label order");
    }

    const std::size_t k = label_order.size();
    EvalReport report;
    report.averaging = averaging;
    report.label_order = label_order;
    report.n_samples = static_cast<std::int64_t>(y_true.size());
    report.confusion.assign(k, std::vector<std::int64_t>(k, 0));

    for (std::size_t i = 0; i < y_true.size(); ++i) {
        auto t = index.find(y_true[i]);
        if (t == index.end()) throw Error("evaluate: unknown true label '" + y_true[i] + "'");
        auto p = index.find(y_pred[i]);
        if (p == index.end()) throw Error("evaluate: unknown predicted label '" + y_pred[i] + "'");
        ++report.confusion[t->second][p->second];
    }

    std::vector<Fraction> precisions(k), recalls(k), f1s(k);
    std::vector<std::int64_t> supports(k, 0);
    std::int64_t trace = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::int64_t tp = report.confusion[c][c];
        std::int64_t fn = 0, fp = 0;
        for (std::size_t j = 0; j < k; ++j) {
            if (j == c) continue;
            fn += report.confusion[c][j];
            fp += report.confusion[j][c];
        }
        trace += tp;
        supports[c] = tp + fn;
        precisions[c] = {tp, tp + fp};
        recalls[c] = {tp, tp + fn};
        f1s[c] = {2 * tp, 2 * tp + fp + fn};  // harmonic mean of p and r

        PerClassMetrics pc;
        pc.precision = precisions[c].value(&report.zero_division_events);
        pc.recall = recalls[c].value(&report.zero_division_events);
        pc.f1 = f1s[c].value(&report.zero_division_events);
        pc.support = supports[c];
        report.per_class.emplace(label_order[c], pc);
    }

    report.accuracy = static_cast<double>(trace) / static_cast<double>(report.n_samples);
    report.precision = aggregate(precisions, supports, averaging, report.n_samples);
    report.recall = aggregate(recalls, supports, averaging, report.n_samples);
    report.f1 = aggregate(f1s, supports, averaging, report.n_samples);
    return report;
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json j;
    j["accuracy"] = accuracy;
    j["precision"] = precision;
    j["recall"] = recall;
    j["f1"] = f1;
    j["averaging"] = averaging_name(averaging);
    j["n_samples"] = n_samples;
    j["zero_division_events"] = zero_division_events;
    j["labels"] = label_order;
    nlohmann::json per;
    for (const auto& [label, pc] : per_class) {
        per[label] = {{"precision", pc.precision},
                      {"recall", pc.recall},
                      {"f1", pc.f1},
                      {"support", pc.support}};
    }
    j["per_class"] = std::move(per);
    j["confusion"] = confusion;
    return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
    EvalReport report;
    report.accuracy = j.at("accuracy").get<double>();
    report.precision = j.at("precision").get<double>();
    report.recall = j.at("recall").get<double>();
    report.f1 = j.at("f1").get<double>();
    report.averaging = averaging_from_name(j.at("averaging").get<std::string>());
    report.n_samples = j.at("n_samples").get<std::int64_t>();
    report.zero_division_events = j.at("zero_division_events").get<int>();
    report.label_order = j.at("labels").get<std::vector<std::string>>();
    for (const auto& [label, pc] : j.at("per_class").items()) {
        PerClassMetrics metrics;
        metrics.precision = pc.at("precision").get<double>();
        metrics.recall = pc.at("recall").get<double>();
        metrics.f1 = pc.at("f1").get<double>();
        metrics.support = pc.at("support").get<std::int64_t>();
        report.per_class.emplace(label, metrics);
    }
    report.confusion = j.at("confusion").get<std::vector<std::vector<std::int64_t>>>();
    return report;
}

}  // namespace oneshot
