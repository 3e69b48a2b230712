#include "mcrg/errors.hpp"
#include "mcrg/metrics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mcrg;

namespace {

// Scores realizing the given binary confusion counts at threshold 0.5.
void append(std::vector<double>& scores, std::vector<int>& labels, int count, double score, int label) {
    for (int i = 0; i < count; ++i) {
        scores.push_back(score);
        labels.push_back(label);
    }
}

}  // namespace

TEST_CASE("binary metrics from confusion counts") {
    std::vector<double> s;
    std::vector<int> y;
    append(s, y, 2, 0.9, 1);  // TP
    append(s, y, 1, 0.7, 0);  // FP
    append(s, y, 1, 0.2, 1);  // FN
    append(s, y, 6, 0.1, 0);  // TN
    MetricsReport r = evaluate_classification(s, y, 0.5);
    CHECK(r.n == 10);
    CHECK(std::abs(r.precision - 2.0 / 3) < 1e-9);
    CHECK(std::abs(r.recall - 2.0 / 3) < 1e-9);
    CHECK(std::abs(r.f1 - 2.0 / 3) < 1e-9);
    CHECK(std::abs(r.accuracy - 0.8) < 1e-9);
    CHECK(r.confusion == std::vector<std::vector<std::size_t>>{{6, 1}, {1, 2}});
    CHECK(r.per_class[0].support == 7);
    CHECK(r.per_class[1].support == 3);
    // Class 0: precision 6/7, recall 6/7.
    CHECK(std::abs(r.per_class[0].f1 - 6.0 / 7) < 1e-9);
    CHECK(std::abs(r.macro_f1 - (6.0 / 7 + 2.0 / 3) / 2) < 1e-9);
    REQUIRE(r.roc_auc);
    CHECK(*r.roc_auc == doctest::Approx(*oracle::pairwise_auc(s, y)));
    CHECK(r.threshold == 0.5);

    // The threshold is inclusive.
    CHECK(evaluate_classification(std::vector<double>{0.5}, std::vector<int>{1}, 0.5).confusion[1][1] == 1);
}

TEST_CASE("ROC-AUC examples") {
    using V = std::vector<double>;
    using L = std::vector<int>;
    CHECK(roc_auc(V{0.9, 0.8, 0.2, 0.1}, L{1, 1, 0, 0}) == 1.0);
    CHECK(roc_auc(V{0.1, 0.2, 0.8, 0.9}, L{1, 1, 0, 0}) == 0.0);
    CHECK(roc_auc(V{0.9, 0.8, 0.4, 0.3}, L{1, 0, 1, 0}) == doctest::Approx(0.75));
    CHECK(*oracle::pairwise_auc(V{0.9, 0.8, 0.4, 0.3}, L{1, 0, 1, 0}) == doctest::Approx(0.75));
    CHECK(roc_auc(V{0.5, 0.5, 0.5}, L{1, 0, 0}) == 0.5);
    CHECK(roc_auc(V{0.7, 0.5, 0.5, 0.1}, L{1, 1, 0, 0}) == doctest::Approx(0.875));

    CHECK_THROWS_AS(roc_auc(V{0.2, 0.4}, L{1, 1}), SingleClassAuc);
    MetricsReport one = evaluate_classification(V{0.2, 0.4}, L{0, 0}, 0.5);
    CHECK_FALSE(one.roc_auc);
    CHECK(one.accuracy == 1.0);
    CHECK(one.per_class[1].precision == 0.0);
    CHECK(one.per_class[1].f1 == 0.0);
}

TEST_CASE("AUC agrees with the pairwise oracle") {
    std::mt19937_64 rng(31);
    int compared = 0;
    for (int t = 0; t < 300; ++t) {
        const int n = 1 + static_cast<int>(rng() % 200);
        // Coarse scores so ties are common.
        const int levels = 2 + static_cast<int>(rng() % 20);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (int i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng() % levels) / levels;
            y[i] = static_cast<int>(rng() % 3 == 0);
        }
        auto expected = oracle::pairwise_auc(s, y);
        MetricsReport r = evaluate_classification(s, y, 0.5);
        REQUIRE(r.roc_auc.has_value() == expected.has_value());
        if (expected) {
            CHECK(std::abs(*r.roc_auc - *expected) < 1e-12);
            ++compared;
        }
    }
    CHECK(compared >= 50);
}

TEST_CASE("classification metrics match direct counts") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 200; ++t) {
        const int c = 2 + static_cast<int>(rng() % 4);
        const int n = 1 + static_cast<int>(rng() % 60);
        std::vector<std::vector<double>> rows(n, std::vector<double>(c));
        std::vector<int> y(n);
        std::vector<int> pred(n);
        for (int i = 0; i < n; ++i) {
            for (auto& v : rows[i]) v = static_cast<double>(rng() % 5);
            y[i] = static_cast<int>(rng() % c);
            pred[i] = 0;
            for (int k = 1; k < c; ++k) {
                if (rows[i][k] > rows[i][pred[i]]) pred[i] = k;
            }
        }
        MetricsReport r = evaluate_classification(rows, y);
        std::size_t total = 0;
        int correct = 0;
        for (int i = 0; i < n; ++i) correct += pred[i] == y[i];
        double macro = 0;
        for (int k = 0; k < c; ++k) {
            int tp = 0, fp = 0, fn = 0, sup = 0;
            for (int i = 0; i < n; ++i) {
                tp += pred[i] == k && y[i] == k;
                fp += pred[i] == k && y[i] != k;
                fn += pred[i] != k && y[i] == k;
                sup += y[i] == k;
            }
            const auto& m = r.per_class[k];
            const double p = tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0;
            const double rc = tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0;
            const double f = 2 * tp + fp + fn ? 2.0 * tp / (2 * tp + fp + fn) : 0.0;
            CHECK(std::abs(m.precision - p) < 1e-9);
            CHECK(std::abs(m.recall - rc) < 1e-9);
            CHECK(std::abs(m.f1 - f) < 1e-9);
            CHECK(m.support == static_cast<std::size_t>(sup));
            for (double v : {m.precision, m.recall, m.f1}) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
            macro += f / c;
            for (auto x : r.confusion[k]) total += x;
        }
        CHECK(total == static_cast<std::size_t>(n));
        CHECK(std::abs(r.accuracy - static_cast<double>(correct) / n) < 1e-9);
        CHECK(std::abs(r.macro_f1 - macro) < 1e-9);
        CHECK_FALSE(r.roc_auc);
    }
}

TEST_CASE("multi-class ties go to the lowest class") {
    std::vector<std::vector<double>> rows = {{0.2, 0.4, 0.4}, {1, 0, 0}, {0.1, 0.1, 0.8}};
    MetricsReport r = evaluate_classification(rows, std::vector<int>{1, 0, 1});
    CHECK(r.confusion[1][1] == 1);
    CHECK(r.confusion[1][2] == 1);
    CHECK(r.accuracy == doctest::Approx(2.0 / 3));
    CHECK(r.f1 == r.macro_f1);
}

TEST_CASE("classification errors") {
    using V = std::vector<double>;
    using L = std::vector<int>;
    CHECK_THROWS_AS(evaluate_classification(V{}, L{}, 0.5), EmptyInput);
    CHECK_THROWS_AS(evaluate_classification(V{0.1}, L{1, 0}, 0.5), DimensionMismatch);
    CHECK_THROWS_AS(evaluate_classification(V{0.1}, L{2}, 0.5), InvalidArgument);
    CHECK_THROWS_AS(evaluate_classification(std::vector<std::vector<double>>{{0.5, 0.5}}, L{3}), InvalidArgument);
    CHECK_THROWS_AS(metrics_from_confusion({}), EmptyInput);
    CHECK_THROWS_AS(metrics_from_confusion({{0, 0}, {0, 0}}), EmptyInput);
    CHECK_THROWS_AS(metrics_from_confusion({{1, 0}}), DimensionMismatch);
}

TEST_CASE("regression metrics") {
    using V = std::vector<double>;
    RegressionMetrics same = evaluate_regression(V{0.2, 0.5}, V{0.2, 0.5});
    CHECK(same.mae == 0.0);
    CHECK(same.rmse == 0.0);
    RegressionMetrics shifted = evaluate_regression(V{1, 2, 3}, V{0, 1, 2});
    CHECK(shifted.mae == 1.0);
    CHECK(shifted.rmse == 1.0);
    RegressionMetrics r = evaluate_regression(V{0, 1}, V{1, 1});
    CHECK(r.mae == doctest::Approx(0.5));
    CHECK(r.rmse == doctest::Approx(0.707107).epsilon(1e-6));
    CHECK(r.rmse == doctest::Approx(std::sqrt(0.5)));
    CHECK_THROWS_AS(evaluate_regression(V{}, V{}), EmptyInput);
    CHECK_THROWS_AS(evaluate_regression(V{1}, V{}), DimensionMismatch);
}

TEST_CASE("metrics JSON round trip") {
    MetricsReport r = evaluate_classification(std::vector<double>{0.9, 0.1, 0.6}, std::vector<int>{1, 0, 0}, 0.5);
    r.task = "likelihood";
    r.mae = 0.25;
    auto j = to_json(r);
    CHECK(j["rmse"].is_null());
    MetricsReport back = metrics_report_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.roc_auc == r.roc_auc);
    j.erase("confusion");
    CHECK_THROWS_AS(metrics_report_from_json(j), SchemaError);
}
