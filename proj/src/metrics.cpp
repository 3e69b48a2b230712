#include "mcrg/metrics.hpp"

#include "mcrg/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mcrg {

using nlohmann::json;

namespace {

double ratio(double num, double den) { return den == 0 ? 0.0 : num / den; }

void check_aligned(std::size_t a, std::size_t b) {
    if (a == 0) throw EmptyInput("no samples to evaluate");
    if (a != b) throw DimensionMismatch(fmt::format("{} predictions for {} labels", a, b));
}

}  // namespace

MetricsReport metrics_from_confusion(const std::vector<std::vector<std::size_t>>& confusion) {
    const std::size_t c = confusion.size();
    for (const auto& row : confusion) {
        if (row.size() != c) throw DimensionMismatch("confusion matrix is not square");
    }
    MetricsReport r;
    r.confusion = confusion;
    std::size_t correct = 0;
    for (std::size_t k = 0; k < c; ++k) {
        r.n += std::accumulate(confusion[k].begin(), confusion[k].end(), std::size_t{0});
        correct += confusion[k][k];
    }
    if (r.n == 0) throw EmptyInput("confusion matrix holds no samples");
    r.accuracy = static_cast<double>(correct) / static_cast<double>(r.n);

    for (std::size_t k = 0; k < c; ++k) {
        double predicted = 0;
        for (std::size_t g = 0; g < c; ++g) predicted += static_cast<double>(confusion[g][k]);
        ClassMetrics m;
        m.support = std::accumulate(confusion[k].begin(), confusion[k].end(), std::size_t{0});
        const double tp = static_cast<double>(confusion[k][k]);
        m.precision = ratio(tp, predicted);
        m.recall = ratio(tp, static_cast<double>(m.support));
        m.f1 = ratio(2 * m.precision * m.recall, m.precision + m.recall);
        r.per_class.push_back(m);
        r.macro_precision += m.precision / static_cast<double>(c);
        r.macro_recall += m.recall / static_cast<double>(c);
        r.macro_f1 += m.f1 / static_cast<double>(c);
    }
    if (c == 2) {
        r.precision = r.per_class[1].precision;
        r.recall = r.per_class[1].recall;
        r.f1 = r.per_class[1].f1;
    } else {
        r.precision = r.macro_precision;
        r.recall = r.macro_recall;
        r.f1 = r.macro_f1;
    }
    return r;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    check_aligned(scores.size(), labels.size());
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double pos = 0, rank_sum = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) {
                pos += 1;
                rank_sum += avg_rank;
            }
        }
        i = j;
    }
    const double neg = static_cast<double>(scores.size()) - pos;
    if (pos == 0 || neg == 0) throw SingleClassAuc();
    return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

MetricsReport evaluate_classification(std::span<const double> scores, std::span<const int> labels,
                                      double threshold) {
    check_aligned(scores.size(), labels.size());
    std::vector<std::vector<std::size_t>> confusion(2, std::vector<std::size_t>(2, 0));
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw InvalidArgument(fmt::format("binary label {}", labels[i]));
        if (!std::isfinite(scores[i])) throw InvalidArgument("non-finite score");
        confusion[labels[i]][scores[i] >= threshold ? 1 : 0] += 1;
    }
    MetricsReport r = metrics_from_confusion(confusion);
    r.threshold = threshold;
    try {
        r.roc_auc = roc_auc(scores, labels);
    } catch (const SingleClassAuc&) {
    }
    return r;
}

MetricsReport evaluate_classification(const std::vector<std::vector<double>>& scores, std::span<const int> labels) {
    check_aligned(scores.size(), labels.size());
    const std::size_t c = scores.front().size();
    if (c < 2) throw InvalidArgument("need at least two classes");
    std::vector<std::vector<std::size_t>> confusion(c, std::vector<std::size_t>(c, 0));
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].size() != c) throw DimensionMismatch("score rows differ in length");
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
            throw InvalidArgument(fmt::format("label {} outside [0, {})", labels[i], c));
        }
        const auto best = std::max_element(scores[i].begin(), scores[i].end()) - scores[i].begin();
        confusion[labels[i]][best] += 1;
    }
    return metrics_from_confusion(confusion);
}

RegressionMetrics evaluate_regression(std::span<const double> predictions, std::span<const double> targets) {
    check_aligned(predictions.size(), targets.size());
    double abs = 0, sq = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - targets[i];
        abs += std::abs(d);
        sq += d * d;
    }
    const auto n = static_cast<double>(predictions.size());
    return {abs / n, std::sqrt(sq / n)};
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace

json to_json(const MetricsReport& r) {
    json per_class = json::array();
    for (const auto& m : r.per_class) {
        per_class.push_back({{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}});
    }
    return {{"task", r.task},
            {"n", r.n},
            {"accuracy", r.accuracy},
            {"precision", r.precision},
            {"recall", r.recall},
            {"f1", r.f1},
            {"macro_precision", r.macro_precision},
            {"macro_recall", r.macro_recall},
            {"macro_f1", r.macro_f1},
            {"roc_auc", optional_number(r.roc_auc)},
            {"threshold", optional_number(r.threshold)},
            {"mae", optional_number(r.mae)},
            {"rmse", optional_number(r.rmse)},
            {"per_class", per_class},
            {"confusion", r.confusion}};
}

MetricsReport metrics_report_from_json(const json& j) {
    try {
        MetricsReport r;
        r.task = j.at("task").get<std::string>();
        r.n = j.at("n").get<std::size_t>();
        r.accuracy = j.at("accuracy").get<double>();
        r.precision = j.at("precision").get<double>();
        r.recall = j.at("recall").get<double>();
        r.f1 = j.at("f1").get<double>();
        r.macro_precision = j.at("macro_precision").get<double>();
        r.macro_recall = j.at("macro_recall").get<double>();
        r.macro_f1 = j.at("macro_f1").get<double>();
        r.roc_auc = read_optional(j, "roc_auc");
        r.threshold = read_optional(j, "threshold");
        r.mae = read_optional(j, "mae");
        r.rmse = read_optional(j, "rmse");
        for (const auto& m : j.at("per_class")) {
            r.per_class.push_back({m.at("precision").get<double>(), m.at("recall").get<double>(),
                                   m.at("f1").get<double>(), m.at("support").get<std::size_t>()});
        }
        r.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
        return r;
    } catch (const json::exception& e) {
        throw SchemaError("metrics", "<document>", e.what());
    }
}

}  // namespace mcrg
