// Prints one PASS/FAIL line per acceptance criterion and exits non-zero when
// any criterion fails.

#include "mcrg/ast.hpp"
#include "mcrg/cli.hpp"
#include "mcrg/diff.hpp"
#include "mcrg/errors.hpp"
#include "mcrg/graphlearn.hpp"
#include "mcrg/labeling.hpp"
#include "mcrg/log.hpp"
#include "mcrg/metrics.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "planted.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <unistd.h>

using namespace mcrg;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Outcome gradient_suite() {
    const auto start = Clock::now();
    double worst = 0;
    std::string worst_name;
    int checks = 0;
    for (unsigned seed = 1; seed <= 5; ++seed) {
        for (const auto& r : oracle::gradient_suite(seed)) {
            checks += r.checked;
            if (r.max_rel_error >= worst) {
                worst = r.max_rel_error;
                worst_name = r.name;
            }
        }
    }
    const double t = seconds_since(start);
    return {worst < 1e-4 && t < 30,
            fmt::format("max rel error {:.2e} ({}), {} entries, 5 seeds, {:.1f}s", worst, worst_name, checks, t)};
}

Outcome anchoring() {
    std::mt19937_64 rng(2025);
    int mismatches = 0, cases = 0;
    for (int i = 0; i < 100; ++i) {
        oracle::GenOptions opt;
        opt.max_depth = 1 + static_cast<int>(rng() % 3);
        const std::string source = oracle::random_minij(rng, opt);
        AstGraph g = parse_source(source, "F.mj", 1);
        std::set<int> changed;
        for (int l = 1; l <= g.line_count; ++l) {
            if (rng() % 3 == 0) changed.insert(l);
        }
        for (int k = 0; k < 10; ++k) {
            const int ls = 1 + static_cast<int>(rng() % static_cast<unsigned>(g.line_count));
            const int le = std::min(g.line_count, ls + static_cast<int>(rng() % 5));
            ++cases;
            if (node_span_cover(g, ls, le) != oracle::exhaustive_cover(g, source, ls, le)) ++mismatches;

            ReviewComment c;
            c.file_path = "F.mj";
            c.revision_index = 1;
            c.line_start = ls;
            c.line_end = le;
            std::vector<int> hit;
            for (int l = ls; l <= le; ++l) {
                if (changed.count(l)) hit.push_back(l);
            }
            const int lo = hit.empty() ? ls : hit.front();
            const int hi = hit.empty() ? le : hit.back();
            if (anchor_comment(g, c, changed) != oracle::exhaustive_cover(g, source, lo, hi)) ++mismatches;
        }
    }
    return {mismatches == 0, fmt::format("{} mismatches over {} graphs x {} ranges", mismatches, 100, cases / 100)};
}

std::vector<fs::path> mj_files(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".mj") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

Outcome parser() {
    const fs::path root = oracle::fixture_dir() / "minij";
    auto good = mj_files(root / "good");
    int violations = 0;
    for (const auto& path : good) {
        const std::string source = oracle::read_file(path);
        AstGraph g = parse_source(source, path.filename().string());
        violations += static_cast<int>(check_graph_invariants(g).size() + oracle::tree_violations(g).size());
        if (oracle::leaf_tokens(g) != oracle::expected_leaf_tokens(source)) ++violations;
    }
    auto expected = nlohmann::json::parse(oracle::read_file(root / "bad" / "expected.json"));
    auto bad = mj_files(root / "bad");
    int wrong = 0;
    for (const auto& path : bad) {
        const auto& pos = expected.at(path.filename().string());
        try {
            parse_source(oracle::read_file(path));
            ++wrong;
        } catch (const SyntaxError& e) {
            if (e.line != pos[0].get<int>() || e.col != pos[1].get<int>()) ++wrong;
        }
    }
    return {good.size() >= 25 && violations == 0 && wrong == 0 && bad.size() == expected.size(),
            fmt::format("{} good files, {} invariant violations; {} malformed files, {} wrong positions",
                        good.size(), violations, bad.size(), wrong)};
}

Outcome diff_round_trip() {
    std::mt19937_64 rng(4);
    int failures = 0;
    for (int i = 0; i < 50; ++i) {
        const std::string a = oracle::random_text(rng, 1 + static_cast<int>(rng() % 30), rng() % 3 != 0);
        const std::string b = oracle::mutate_text(rng, a, rng() % 3 != 0);
        try {
            if (apply_hunks(a, parse_unified_diff(oracle::lcs_unified_diff(a, b))) != b) ++failures;
        } catch (const Error&) {
            ++failures;
        }
    }
    return {failures == 0, fmt::format("{} of 50 pairs failed", failures)};
}

const ReviewCorpus& mini() {
    static const ReviewCorpus corpus = load_corpus(oracle::fixture_dir() / "mini" / "corpus.jsonl");
    return corpus;
}

const nlohmann::json& trace() {
    static const nlohmann::json j =
        nlohmann::json::parse(oracle::read_file(oracle::fixture_dir() / "mini" / "label_trace.json"));
    return j;
}

Outcome labeling() {
    int mismatches = 0, not_antitone = 0, graphs = 0;
    for (const auto& t : trace()["graphs"]) {
        const PullRequest* pr = mini().find(t["pr_id"]);
        const std::string file = t["file_path"];
        const int rev = t["revision_index"];
        AstGraph g = parse_source(pr->find_revision(file, rev)->content, file, rev);
        std::map<int, std::string> expected_pos;
        for (const auto& [k, v] : t["positive"].items()) expected_pos[std::stoi(k)] = v.get<std::string>();
        std::set<int> previous_neg;
        for (int w = 1; w <= 3; ++w) {
            LabeledGraph lg = label_graph(g, pr->comments, *pr, w);
            std::map<int, std::string> pos;
            std::set<int> neg;
            for (const auto& l : lg.labels) {
                if (l.commented == Commented::positive) pos[l.node_id] = std::string(topic_name(*l.topic));
                if (l.commented == Commented::negative) neg.insert(l.node_id);
            }
            if (pos != expected_pos || neg != t["negative"][std::to_string(w)].get<std::set<int>>()) ++mismatches;
            if (w > 1 && !std::includes(previous_neg.begin(), previous_neg.end(), neg.begin(), neg.end())) {
                ++not_antitone;
            }
            previous_neg = neg;
        }
        ++graphs;
    }
    return {graphs == 19 && mismatches == 0 && not_antitone == 0,
            fmt::format("{} graphs x W 1..3: {} mismatches, {} antitone violations", graphs, mismatches,
                        not_antitone)};
}

Outcome quality() {
    std::map<std::string, nlohmann::json> expected;
    for (const auto& t : trace()["quality"]) expected[t["comment_id"]] = t;
    int mismatches = 0, n = 0;
    for (const auto& pr : mini().pull_requests) {
        for (const auto& c : pr.comments) {
            ++n;
            auto it = expected.find(c.id);
            if (it == expected.end()) {
                ++mismatches;
                continue;
            }
            const auto& t = it->second;
            AstGraph g = parse_source(pr.find_revision(c.file_path, c.revision_index)->content, c.file_path,
                                      c.revision_index);
            QualityLabel q = quality_labels(pr, c, g);
            const Span& s = g.nodes[q.anchored_node].span;
            std::set<int> lines;
            for (int l = s.line_start; l <= s.line_end; ++l) lines.insert(l);
            const int brute = oracle::brute_force_modified(pr, c.file_path, lines, c.revision_index) ? 1 : 0;
            if (q.clarity != 1.0 / (1.0 + t["later_in_thread"].get<int>())) ++mismatches;
            if (q.actionability != brute || q.actionability != t["actionability"].get<int>()) ++mismatches;
            if (q.anchored_node != t["anchored_node"].get<int>()) ++mismatches;
        }
    }
    return {n > 0 && n == static_cast<int>(expected.size()) && mismatches == 0,
            fmt::format("{} comments, {} mismatches", n, mismatches)};
}

Outcome planted_rules() {
    std::mt19937_64 rng(2024);
    planted::Split s = planted::split(planted::return_in_if(rng, 30));
    ModelConfig mc = planted::harness_config(Task::likelihood);
    TrainConfig tc;
    tc.seed = 1;
    auto start = Clock::now();
    Checkpoint ck = train(node_dataset(Task::likelihood, s.train, mc.features), mc, tc);
    const double t_lik = seconds_since(start);
    const double train_acc = planted::node_accuracy(*ck.model, node_dataset(Task::likelihood, s.train, mc.features)).accuracy;
    const double test_acc = planted::node_accuracy(*ck.model, node_dataset(Task::likelihood, s.test, mc.features)).accuracy;

    std::mt19937_64 rng2(77);
    planted::Split topics = planted::split(planted::five_topics(rng2, 30));
    ModelConfig tcfg = planted::harness_config(Task::topic);
    start = Clock::now();
    Checkpoint tk = train(node_dataset(Task::topic, topics.train, tcfg.features), tcfg, tc);
    const double t_top = seconds_since(start);
    const double f1_train = planted::macro_f1(*tk.model, node_dataset(Task::topic, topics.train, tcfg.features));
    const double f1_test = planted::macro_f1(*tk.model, node_dataset(Task::topic, topics.test, tcfg.features));

    const bool pass = train_acc >= 0.95 && test_acc >= 0.90 && t_lik < 60 && ck.epoch_losses.size() == 200 &&
                      f1_train >= 0.85 && f1_test >= 0.85 && t_top < 60;
    return {pass, fmt::format("likelihood train {:.4f} test {:.4f} ({:.1f}s); topic macro-F1 train {:.4f} test {:.4f} "
                              "({:.1f}s)",
                              train_acc, test_acc, t_lik, f1_train, f1_test, t_top)};
}

Outcome split_hygiene() {
    ReviewCorpus corpus;
    for (int i = 0; i < 1000; ++i) {
        PullRequest pr;
        pr.id = "org/repo#" + std::to_string(i);
        corpus.pull_requests.push_back(pr);
    }
    DatasetSplit a = split_dataset(corpus, 0.8, 42);
    int overlap = 0;
    for (const auto& id : a.train_pr_ids) overlap += static_cast<int>(a.test_pr_ids.count(id));
    ReviewCorpus shuffled = corpus;
    std::mt19937_64 rng(3);
    std::shuffle(shuffled.pull_requests.begin(), shuffled.pull_requests.end(), rng);
    DatasetSplit b = split_dataset(shuffled, 0.8, 42);
    const double frac = static_cast<double>(a.train_pr_ids.size()) / 1000.0;
    const bool reorder = a.train_pr_ids == b.train_pr_ids && a.test_pr_ids == b.test_pr_ids;
    return {overlap == 0 && reorder && std::abs(frac - 0.8) <= 0.05 &&
                a.train_pr_ids.size() + a.test_pr_ids.size() == 1000,
            fmt::format("train fraction {:.3f}, overlap {}, reorder invariant {}", frac, overlap, reorder)};
}

Outcome metrics() {
    std::vector<double> s = {0.9, 0.9, 0.7, 0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
    std::vector<int> y = {1, 1, 0, 1, 0, 0, 0, 0, 0, 0};
    MetricsReport r = evaluate_classification(s, y, 0.5);
    const bool exact = std::abs(r.precision - 2.0 / 3) < 1e-9 && std::abs(r.recall - 2.0 / 3) < 1e-9 &&
                       std::abs(r.f1 - 2.0 / 3) < 1e-9 && std::abs(r.accuracy - 0.8) < 1e-9;
    const bool worked = std::abs(roc_auc(std::vector<double>{0.9, 0.8, 0.4, 0.3}, std::vector<int>{1, 0, 1, 0}) -
                                 0.75) < 1e-9;
    std::mt19937_64 rng(9);
    int compared = 0;
    double worst = 0;
    while (compared < 50) {
        const int n = 2 + static_cast<int>(rng() % 199);
        std::vector<double> sc(n);
        std::vector<int> lb(n);
        for (int i = 0; i < n; ++i) {
            sc[i] = static_cast<double>(rng() % 16) / 16;
            lb[i] = static_cast<int>(rng() % 2);
        }
        auto expected = oracle::pairwise_auc(sc, lb);
        if (!expected) continue;
        worst = std::max(worst, std::abs(roc_auc(sc, lb) - *expected));
        ++compared;
    }
    return {exact && worked && worst < 1e-9,
            fmt::format("hand fixtures {}, AUC max deviation {:.1e} over {} random sets", exact && worked ? "exact" : "off",
                        worst, compared)};
}

struct PipelineRun {
    bool ok = true;
    std::string failure;
    double seconds = 0;
};

PipelineRun run_pipeline(const fs::path& dir) {
    const std::string corpus = (dir / "corpus.jsonl").string();
    const std::string split = (dir / "split.json").string();
    const std::string d = dir.string();
    std::vector<std::vector<std::string>> steps = {
        {"ingest", "--input", (oracle::fixture_dir() / "mini" / "export.json").string(), "--out", corpus},
        {"split", "--corpus", corpus, "--ratio", "0.8", "--seed", "1", "--out", split},
        {"train", "--task", "likelihood", "--corpus", corpus, "--split", split, "--seed", "1", "--out", d + "/likelihood.json"},
        {"train", "--task", "topic", "--corpus", corpus, "--split", split, "--seed", "1", "--out", d + "/topic.json"},
        {"train", "--task", "quality", "--corpus", corpus, "--split", split, "--seed", "1", "--out", d + "/quality.json"},
        {"evaluate", "--corpus", corpus, "--split", split, "--model", d + "/likelihood.json", "--out", d + "/metrics.json"},
        {"evaluate", "--corpus", corpus, "--split", split, "--model", d + "/topic.json", "--out", d + "/metrics_topic.json"},
        {"evaluate", "--corpus", corpus, "--split", split, "--model", d + "/quality.json", "--out",
         d + "/metrics_quality.json"},
        {"predict", "--model", d + "/likelihood.json", "--topic-model", d + "/topic.json", "--corpus", corpus, "--split",
         split, "--out", d + "/report"},
    };
    PipelineRun run;
    fs::create_directories(dir);
    const auto start = Clock::now();
    for (const auto& args : steps) {
        std::ostringstream out, err;
        if (cli_main(args, out, err) != 0) {
            run.ok = false;
            run.failure = args[0] + ": " + err.str();
            break;
        }
    }
    run.seconds = seconds_since(start);
    return run;
}

Outcome determinism() {
    log::set_quiet(true);
    const fs::path root = fs::temp_directory_path() / ("mcrg_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    PipelineRun a = run_pipeline(root / "a");
    PipelineRun b = run_pipeline(root / "b");
    log::set_quiet(false);
    if (!a.ok || !b.ok) {
        fs::remove_all(root);
        return {false, "pipeline failed: " + (a.ok ? b.failure : a.failure)};
    }
    const std::vector<std::string> artifacts = {
        "corpus.jsonl",         "split.json",   "likelihood.json",    "topic.json",       "quality.json",
        "metrics.json",         "metrics_topic.json", "metrics_quality.json", "report/report.txt", "report/report.json"};
    int differing = 0;
    for (const auto& name : artifacts) {
        if (oracle::read_file(root / "a" / name) != oracle::read_file(root / "b" / name)) ++differing;
    }
    fs::remove_all(root);
    return {differing == 0 && a.seconds < 120,
            fmt::format("{} of {} artifacts differ; pipeline {:.1f}s per run", differing, artifacts.size(), a.seconds)};
}

Outcome equivariance() {
    std::mt19937_64 rng(12);
    double worst = 0, scale = 0;
    for (int trial = 0; trial < 20; ++trial) {
        AstGraph g = parse_source(oracle::random_minij(rng, {}));
        const int n = static_cast<int>(g.size());
        auto adj = prepare_graph(g, FeatureSpec{}).adjacency;
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        nn::Matrix h = nn::glorot(n, 6, rng);
        auto l1 = GcnLayer::init(6, 8, Activation::relu, rng);
        auto l2 = GcnLayer::init(8, 4, Activation::identity, rng);
        l1.b.mutable_value().setRandom();
        auto forward = [&](const nn::Matrix& x, const std::vector<AdjEntry>& a) {
            return gcn_forward(gcn_forward(nn::Tensor::constant(x), a, l1), a, l2).value();
        };
        nn::Matrix out = forward(h, adj);
        nn::Matrix ph(n, 6);
        for (int i = 0; i < n; ++i) ph.row(perm[i]) = h.row(i);
        std::vector<AdjEntry> padj;
        for (const auto& e : adj) padj.push_back({perm[e.row], perm[e.col], e.weight});
        nn::Matrix pout = forward(ph, padj);
        scale = std::max(scale, out.cwiseAbs().maxCoeff());
        for (int i = 0; i < n; ++i) worst = std::max(worst, (pout.row(perm[i]) - out.row(i)).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-6, fmt::format("max deviation {:.1e} over 20 AST graphs (output magnitude {:.2f})", worst, scale)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"gradient suite", gradient_suite},
        {"anchoring oracle", anchoring},
        {"parser invariants", parser},
        {"diff round trip", diff_round_trip},
        {"labeling semantics", labeling},
        {"quality labels", quality},
        {"planted-rule learnability", planted_rules},
        {"split hygiene", split_hygiene},
        {"metrics exactness", metrics},
        {"end-to-end determinism", determinism},
        {"GCN equivariance", equivariance},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << fmt::format("{} {:>2} {}: {}", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail)
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
