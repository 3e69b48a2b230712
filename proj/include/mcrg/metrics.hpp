#pragma once

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mcrg {

struct ClassMetrics {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    std::size_t support = 0;  // gold count
};

struct MetricsReport {
    std::string task;
    std::size_t n = 0;
    // confusion[gold][predicted]
    std::vector<std::vector<std::size_t>> confusion;
    std::vector<ClassMetrics> per_class;
    double accuracy = 0;
    // Positive class for binary tasks, macro average otherwise.
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double macro_precision = 0;
    double macro_recall = 0;
    double macro_f1 = 0;
    std::optional<double> roc_auc;  // binary only, absent for one-class input
    std::optional<double> threshold;
    std::optional<double> mae;
    std::optional<double> rmse;
};

// Rates from a square confusion matrix. A zero denominator yields 0.
// Throws EmptyInput when the matrix is empty or sums to zero.
MetricsReport metrics_from_confusion(const std::vector<std::vector<std::size_t>>& confusion);

// Binary: `scores` are P(label 1); predicted 1 iff score >= threshold.
// Throws EmptyInput, DimensionMismatch, InvalidArgument (labels not 0/1).
MetricsReport evaluate_classification(std::span<const double> scores, std::span<const int> labels,
                                      double threshold = 0.5);
// Multi-class: one row of class scores per sample; prediction is the argmax,
// lowest class index on ties.
MetricsReport evaluate_classification(const std::vector<std::vector<double>>& scores, std::span<const int> labels);

// Mann-Whitney statistic with average ranks for tied scores (equivalent to
// pairwise concordance, ties counted 0.5). Throws SingleClassAuc.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct RegressionMetrics {
    double mae = 0;
    double rmse = 0;
};

// Throws EmptyInput, DimensionMismatch.
RegressionMetrics evaluate_regression(std::span<const double> predictions, std::span<const double> targets);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const nlohmann::json& j);

}  // namespace mcrg
