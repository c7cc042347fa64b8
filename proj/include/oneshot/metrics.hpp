#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace oneshot {

enum class Averaging { weighted, macro, micro };

const char* averaging_name(Averaging mode);
Averaging averaging_from_name(const std::string& name);

struct PerClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
};

struct EvalReport {
    double accuracy = 0.0;
    double precision = 0.0;  // averaged per `averaging`
    double recall = 0.0;
    double f1 = 0.0;
    Averaging averaging = Averaging::weighted;
    std::vector<std::string> label_order;
    std::map<std::string, PerClassMetrics> per_class;
    // confusion[i][j] = count of documents with true label i predicted j,
    // indices following label_order.
    std::vector<std::vector<std::int64_t>> confusion;
    std::int64_t n_samples = 0;
    int zero_division_events = 0;

    nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
};

// Per-class precision = TP/(TP+FP), recall = TP/(TP+FN), f1 = harmonic mean
// computed as 2TP/(2TP+FP+FN); zero denominators yield 0 and are counted as
// zero-division events. Weighted averages use true-class support as weights
// and are evaluated from integer confusion counts with a single correctly
// rounded division per term, which makes weighted recall equal accuracy
// bit-exactly.
EvalReport evaluate(const std::vector<std::string>& y_true,
                    const std::vector<std::string>& y_pred,
                    const std::vector<std::string>& label_order,
                    Averaging averaging = Averaging::weighted);

}  // namespace oneshot
