#include "mcrg/errors.hpp"
#include "mcrg/graphlearn.hpp"
#include "oracles.hpp"
#include "planted.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>

using namespace mcrg;
using nn::Matrix;

namespace {

AstGraph small_graph() { return parse_source("class A {\n  int f(int x) {\n    return x + x;\n  }\n}\n", "A.mj"); }

ModelConfig small_config(Task task = Task::likelihood) {
    ModelConfig mc;
    mc.task = task;
    mc.hidden_dims = {8, 8};
    mc.features.token_dim = 4;
    mc.features.hash_buckets = 16;
    return mc;
}

}  // namespace

TEST_CASE("node features") {
    AstGraph g = small_graph();
    FeatureSpec spec{20, 4, 16};
    std::mt19937_64 rng(1);
    nn::Tensor table = nn::Tensor::parameter(nn::glorot(16, 4, rng));
    Matrix x = node_features(prepare_graph(g, spec), spec, table).value();
    CHECK(x.rows() == static_cast<Eigen::Index>(g.nodes.size()));
    CHECK(x.cols() == 24);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        CAPTURE(i);
        CHECK(x.row(static_cast<Eigen::Index>(i)).head(20).sum() == 1.0);
        CHECK(x(static_cast<Eigen::Index>(i), static_cast<int>(g.nodes[i].kind)) == 1.0);
        if (g.nodes[i].kind == NodeKind::return_stmt) CHECK(x.row(static_cast<Eigen::Index>(i)).tail(4).isZero());
    }
    // The two identifier nodes share the token "x".
    std::vector<Eigen::Index> xs;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        if (g.nodes[i].kind == NodeKind::identifier) xs.push_back(static_cast<Eigen::Index>(i));
    }
    REQUIRE(xs.size() == 2);
    CHECK(x.row(xs[0]) == x.row(xs[1]));
    CHECK_FALSE(x.row(xs[0]).tail(4).isZero());
}

TEST_CASE("graph inputs") {
    AstGraph g = small_graph();
    GraphInput in = prepare_graph(g, FeatureSpec{});
    for (int i = 0; i < in.n; ++i) {
        CHECK(std::binary_search(in.neighbors[i].begin(), in.neighbors[i].end(), i));
        CHECK(std::is_sorted(in.neighbors[i].begin(), in.neighbors[i].end()));
    }
    GraphInput both = batch_graphs({in, in});
    CHECK(both.n == 2 * in.n);
    CHECK(both.adjacency.size() == 2 * in.adjacency.size());
    for (const auto& e : both.adjacency) CHECK((e.row < in.n) == (e.col < in.n));
    CHECK(both.neighbors[in.n].front() == in.n);
}

TEST_CASE("forward shapes and ranges") {
    AstGraph g = small_graph();
    std::mt19937_64 rng(3);
    for (Task task : {Task::likelihood, Task::topic}) {
        Model m = init_graph_model(small_config(task), rng);
        GraphInput in = prepare_graph(g, m.config.features);
        auto out = forward_graph(m, in, false, nullptr);
        CHECK(out.logits.rows() == in.n);
        CHECK(out.logits.cols() == (task == Task::likelihood ? 2 : 5));
        CHECK(out.embeddings.cols() == 8);
        // Evaluation passes are deterministic even with dropout configured.
        CHECK(forward_graph(m, in, false, nullptr).logits.value() == out.logits.value());
    }

    auto encoder = std::make_shared<Model>(init_graph_model(small_config(), rng));
    ModelConfig qc = small_config(Task::quality);
    qc.text_dim = 3;
    Model q = init_quality_model(qc, encoder, build_vocabulary({{"a"}, {"a", "b"}}, 1, 10), rng);
    q.quality_b.mutable_value() << 0.3, -1.2;
    QualityInputs zero{{{}, {}}, Matrix::Zero(2, 8)};
    Matrix out = forward_quality(q, zero).value();
    CHECK(out(0, 0) == doctest::Approx(1 / (1 + std::exp(-0.3))));
    CHECK(out(1, 1) == doctest::Approx(1 / (1 + std::exp(1.2))));
    QualityInputs big{{{2, 3}, {1}}, Matrix::Constant(2, 8, 50.0)};
    Matrix out2 = forward_quality(q, big).value();
    for (Eigen::Index i = 0; i < out2.size(); ++i) {
        CHECK(out2.data()[i] >= 0.0);
        CHECK(out2.data()[i] <= 1.0);
    }
    CHECK_THROWS_AS(forward_quality(q, QualityInputs{{{}}, Matrix::Zero(1, 7)}), DimensionMismatch);
    CHECK_THROWS_AS(forward_graph(q, prepare_graph(g, qc.features), false, nullptr), ConfigMismatch);
}

TEST_CASE("config validation") {
    ModelConfig mc;
    mc.layer = LayerType::gat;
    mc.heads = 3;
    CHECK_THROWS_AS(mc.validate(), InvalidArgument);
    mc.heads = 4;
    CHECK_NOTHROW(mc.validate());
    mc.hidden_dims.clear();
    CHECK_THROWS_AS(mc.validate(), InvalidArgument);
    TrainConfig tc;
    tc.lr = 0;
    CHECK_THROWS_AS(tc.validate(), InvalidArgument);
    CHECK(model_config_from_json(to_json(ModelConfig{})).hidden_dims == std::vector<int>{64, 64});
    CHECK(train_config_from_json(nlohmann::json::object()).epochs == 200);
    CHECK_THROWS_AS(task_from_name("nope"), InvalidArgument);
}

TEST_CASE("training errors") {
    auto graphs = planted::return_in_if(*std::make_unique<std::mt19937_64>(1), 2);
    for (auto& g : graphs) {
        for (auto& l : g.labels) l = NodeLabel{l.node_id, Commented::unknown, std::nullopt};
    }
    TrainConfig tc;
    tc.epochs = 2;
    CHECK_THROWS_AS(train(node_dataset(Task::likelihood, graphs, FeatureSpec{}), ModelConfig{}, tc), EmptyDataset);
    CHECK_THROWS_AS(train(node_dataset(Task::topic, graphs, FeatureSpec{}), ModelConfig{}, tc), ConfigMismatch);
    CHECK_THROWS_AS(train(TaskDataset{Task::quality, {}, {}}, small_config(Task::quality), tc), EmptyDataset);
}

TEST_CASE("planted RETURN-inside-IF rule is learned") {
    std::mt19937_64 rng(2024);
    planted::Split s = planted::split(planted::return_in_if(rng, 30));
    ModelConfig mc = planted::harness_config(Task::likelihood);
    TaskDataset train_data = node_dataset(Task::likelihood, s.train, mc.features);
    TaskDataset test_data = node_dataset(Task::likelihood, s.test, mc.features);

    std::vector<Matrix> first_layer;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        CAPTURE(seed);
        TrainConfig tc;
        tc.seed = seed;
        const auto start = std::chrono::steady_clock::now();
        Checkpoint ck = train(train_data, mc, tc);
        CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(60));
        REQUIRE(ck.epoch_losses.size() == 200);
        for (double l : ck.epoch_losses) CHECK(std::isfinite(l));
        auto tr = planted::node_accuracy(*ck.model, train_data);
        auto te = planted::node_accuracy(*ck.model, test_data);
        CHECK(tr.accuracy >= 0.95);
        CHECK(te.accuracy >= 0.90);
        CHECK(tr.positive_recall >= 0.9);
        first_layer.push_back(ck.model->graph.gcn[0].W.value());
        MESSAGE("seed " << seed << ": train " << tr.accuracy << " test " << te.accuracy << " recall "
                        << te.positive_recall << " final loss " << ck.epoch_losses.back());
        if (seed == 1) {
            // 10-epoch moving average of the loss never rises.
            const auto& L = ck.epoch_losses;
            double prev = INFINITY;
            int rises = 0;
            for (std::size_t e = 10; e <= L.size(); ++e) {
                double avg = 0;
                for (std::size_t k = e - 10; k < e; ++k) avg += L[k] / 10;
                if (avg > prev + 1e-12) ++rises;
                prev = avg;
            }
            CHECK(rises == 0);
        }
    }
    CHECK(first_layer[0] != first_layer[1]);
    CHECK(first_layer[1] != first_layer[2]);
}

TEST_CASE("planted five-topic rule is learned") {
    std::mt19937_64 rng(77);
    planted::Split s = planted::split(planted::five_topics(rng, 30));
    ModelConfig mc = planted::harness_config(Task::topic);
    TaskDataset train_data = node_dataset(Task::topic, s.train, mc.features);
    TaskDataset test_data = node_dataset(Task::topic, s.test, mc.features);
    Checkpoint ck = train(train_data, mc, TrainConfig{});
    const double f1_train = planted::macro_f1(*ck.model, train_data);
    const double f1_test = planted::macro_f1(*ck.model, test_data);
    MESSAGE("topic macro-F1 train " << f1_train << " test " << f1_test);
    CHECK(f1_train >= 0.85);
    CHECK(f1_test >= 0.85);
}

TEST_CASE("GAT models train") {
    std::mt19937_64 rng(5);
    planted::Split s = planted::split(planted::return_in_if(rng, 30));
    ModelConfig mc;
    mc.layer = LayerType::gat;
    mc.hidden_dims = {32, 32};
    TaskDataset data = node_dataset(Task::likelihood, s.train, mc.features);
    TrainConfig tc;
    tc.epochs = 60;
    Checkpoint ck = train(data, mc, tc);
    CHECK(ck.epoch_losses.back() < ck.epoch_losses.front());
    auto back = parse_checkpoint(serialize_checkpoint(ck));
    const auto& in = data.graphs[0].input;
    CHECK(predict_node_probabilities(*back.model, in) == predict_node_probabilities(*ck.model, in));
}

TEST_CASE("training is deterministic and checkpoints round trip") {
    std::mt19937_64 rng(9);
    auto graphs = planted::return_in_if(rng, 6);
    ModelConfig mc = small_config();
    TaskDataset data = node_dataset(Task::likelihood, graphs, mc.features);
    TrainConfig tc;
    tc.epochs = 15;
    tc.seed = 4;
    Checkpoint a = train(data, mc, tc);
    Checkpoint b = train(data, mc, tc);
    const std::string text = serialize_checkpoint(a);
    CHECK(text == serialize_checkpoint(b));

    Checkpoint back = parse_checkpoint(text);
    CHECK(serialize_checkpoint(back) == text);
    CHECK(back.epoch_losses == a.epoch_losses);
    for (const auto& g : data.graphs) {
        CHECK(predict_node_probabilities(*back.model, g.input) == predict_node_probabilities(*a.model, g.input));
    }
    auto j = nlohmann::json::parse(text);
    CHECK(j["format_version"] == 1);
    CHECK(j["tensors"]["head.W"]["shape"] == nlohmann::json({8, 2}));
    CHECK(j["metadata"]["seed"] == 4);

    auto broken = j;
    broken["tensors"]["head.W"]["shape"] = {2, 8};
    CHECK_THROWS_AS(parse_checkpoint(broken.dump()), ConfigMismatch);
    broken = j;
    broken["tensors"].erase("head.b");
    CHECK_THROWS_AS(parse_checkpoint(broken.dump()), SchemaError);
    broken = j;
    broken["format_version"] = 2;
    CHECK_THROWS_AS(parse_checkpoint(broken.dump()), SchemaError);
}

TEST_CASE("quality model on the mini corpus") {
    ReviewCorpus corpus = load_corpus(oracle::fixture_dir() / "mini" / "corpus.jsonl");
    std::set<std::string> all;
    for (const auto& pr : corpus.pull_requests) all.insert(pr.id);
    ModelConfig mc = small_config();
    auto labeled = label_corpus(corpus, 2);
    TrainConfig tc;
    tc.epochs = 20;
    auto encoder = train(node_dataset(Task::likelihood, labeled.graphs, mc.features), mc, tc).model;

    ModelConfig qc = small_config(Task::quality);
    qc.vocab_min_df = 1;
    TaskDataset data = quality_dataset(corpus, all, qc.features);
    CHECK(data.comments.size() == 11);
    tc.epochs = 100;
    Checkpoint ck = train(data, qc, tc, encoder);
    CHECK(ck.epoch_losses.back() < ck.epoch_losses.front());
    CHECK(ck.model->vocab.size() > 2);

    const std::string text = serialize_checkpoint(ck);
    Checkpoint back = parse_checkpoint(text);
    CHECK(serialize_checkpoint(back) == text);
    QualityInputs in;
    for (const auto& c : data.comments) {
        in.comment_ids.push_back(ck.model->vocab.encode(c.tokens));
    }
    in.node_embeddings = Matrix(static_cast<Eigen::Index>(data.comments.size()), 8);
    for (std::size_t i = 0; i < data.comments.size(); ++i) {
        in.node_embeddings.row(static_cast<Eigen::Index>(i)) =
            encode_nodes(*back.model->encoder, data.comments[i].graph).row(data.comments[i].anchored_node);
    }
    CHECK(forward_quality(*back.model, in).value() == forward_quality(*ck.model, in).value());

    CHECK_THROWS_AS(train(data, qc, tc, nullptr), ConfigMismatch);
}
