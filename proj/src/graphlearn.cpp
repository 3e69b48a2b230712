#include "mcrg/graphlearn.hpp"

#include "mcrg/errors.hpp"
#include "mcrg/hash.hpp"
#include "mcrg/log.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace mcrg {

using nlohmann::json;
using nn::Matrix;
using nn::Tensor;

namespace {

constexpr std::array<std::string_view, 3> kTaskNames = {"likelihood", "topic", "quality"};
constexpr std::array<std::string_view, 2> kLayerNames = {"gcn", "gat"};

Tensor activate(const Tensor& x, Activation a) { return a == Activation::relu ? nn::relu(x) : x; }

int last_hidden(const ModelConfig& c) { return c.hidden_dims.back(); }

}  // namespace

std::string_view task_name(Task task) { return kTaskNames[static_cast<std::size_t>(task)]; }

Task task_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kTaskNames.size(); ++i) {
        if (kTaskNames[i] == name) return static_cast<Task>(i);
    }
    throw InvalidArgument(fmt::format("unknown task '{}'", name));
}

std::string_view layer_type_name(LayerType type) { return kLayerNames[static_cast<std::size_t>(type)]; }

LayerType layer_type_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kLayerNames.size(); ++i) {
        if (kLayerNames[i] == name) return static_cast<LayerType>(i);
    }
    throw InvalidArgument(fmt::format("unknown layer type '{}'", name));
}

int ModelConfig::output_dim() const {
    switch (task) {
        case Task::likelihood: return 2;
        case Task::topic: return static_cast<int>(kMetaTopicCount);
        case Task::quality: return 2;
    }
    return 0;
}

void ModelConfig::validate() const {
    auto fail = [](const std::string& what) { throw InvalidArgument("model config: " + what); };
    if (hidden_dims.empty()) fail("at least one hidden layer is required");
    for (int d : hidden_dims) {
        if (d < 1) fail(fmt::format("hidden dim {} < 1", d));
        if (layer == LayerType::gat && d % heads != 0) fail(fmt::format("hidden dim {} not divisible by {} heads", d, heads));
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
    if (heads < 1) fail("heads must be >= 1");
    if (leaky_slope < 0) fail("leaky_slope must be >= 0");
    if (features.kind_dim != static_cast<int>(kNodeKindCount)) fail(fmt::format("kind_dim must be {}", kNodeKindCount));
    if (features.token_dim < 0) fail("token_dim must be >= 0");
    if (features.hash_buckets < 1) fail("hash_buckets must be >= 1");
    if (text_dim < 1) fail("text_dim must be >= 1");
    if (vocab_min_df < 1) fail("vocab_min_df must be >= 1");
    if (vocab_max_size < 2) fail("vocab_max_size must be >= 2");
}

void TrainConfig::validate() const {
    auto fail = [](const std::string& what) { throw InvalidArgument("train config: " + what); };
    if (!(lr > 0)) fail("lr must be > 0");
    if (epochs < 1) fail("epochs must be >= 1");
    if (!(weight_decay >= 0)) fail("weight_decay must be >= 0");
    if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1)) fail("betas must be in (0, 1)");
    if (!(eps > 0)) fail("eps must be > 0");
    for (double w : class_weights) {
        if (!(w >= 0)) fail("class weights must be >= 0");
    }
}

json to_json(const ModelConfig& c) {
    return {{"task", task_name(c.task)},
            {"layer", layer_type_name(c.layer)},
            {"hidden_dims", c.hidden_dims},
            {"dropout", c.dropout},
            {"heads", c.heads},
            {"leaky_slope", c.leaky_slope},
            {"features",
             {{"kind_dim", c.features.kind_dim},
              {"token_dim", c.features.token_dim},
              {"hash_buckets", c.features.hash_buckets}}},
            {"text_dim", c.text_dim},
            {"vocab_min_df", c.vocab_min_df},
            {"vocab_max_size", c.vocab_max_size}};
}

ModelConfig model_config_from_json(const json& j) {
    ModelConfig c;
    try {
        if (j.contains("task")) c.task = task_from_name(j.at("task").get<std::string>());
        if (j.contains("layer")) c.layer = layer_type_from_name(j.at("layer").get<std::string>());
        c.hidden_dims = j.value("hidden_dims", c.hidden_dims);
        c.dropout = j.value("dropout", c.dropout);
        c.heads = j.value("heads", c.heads);
        c.leaky_slope = j.value("leaky_slope", c.leaky_slope);
        if (j.contains("features")) {
            const auto& f = j.at("features");
            c.features.kind_dim = f.value("kind_dim", c.features.kind_dim);
            c.features.token_dim = f.value("token_dim", c.features.token_dim);
            c.features.hash_buckets = f.value("hash_buckets", c.features.hash_buckets);
        }
        c.text_dim = j.value("text_dim", c.text_dim);
        c.vocab_min_df = j.value("vocab_min_df", c.vocab_min_df);
        c.vocab_max_size = j.value("vocab_max_size", c.vocab_max_size);
    } catch (const json::exception& e) {
        throw SchemaError("model_config", "<document>", e.what());
    }
    c.validate();
    return c;
}

json to_json(const TrainConfig& c) {
    return {{"lr", c.lr},
            {"epochs", c.epochs},
            {"seed", c.seed},
            {"weight_decay", c.weight_decay},
            {"class_weights", c.class_weights},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"eps", c.eps}};
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    try {
        c.lr = j.value("lr", c.lr);
        c.epochs = j.value("epochs", c.epochs);
        c.seed = j.value("seed", c.seed);
        c.weight_decay = j.value("weight_decay", c.weight_decay);
        c.class_weights = j.value("class_weights", c.class_weights);
        c.beta1 = j.value("beta1", c.beta1);
        c.beta2 = j.value("beta2", c.beta2);
        c.eps = j.value("eps", c.eps);
    } catch (const json::exception& e) {
        throw SchemaError("train_config", "<document>", e.what());
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// Graph inputs

int token_bucket(const std::string& token, int hash_buckets) {
    return static_cast<int>(stable_hash64(token) % static_cast<std::uint64_t>(hash_buckets));
}

nn::SparseMatrix gcn_normalize(const std::vector<AdjEntry>& adjacency, int n) {
    std::vector<double> degree(n, 0.0);
    for (const auto& e : adjacency) degree[e.row] += e.weight;
    nn::SparseMatrix out;
    out.n = n;
    out.entries.reserve(adjacency.size());
    for (const auto& e : adjacency) {
        out.entries.push_back({e.row, e.col, e.weight / std::sqrt(degree[e.row] * degree[e.col])});
    }
    return out;
}

namespace {

void finish_input(GraphInput& in) {
    in.norm_adj = gcn_normalize(in.adjacency, in.n);
    in.neighbors.assign(in.n, {});
    for (const auto& e : in.adjacency) in.neighbors[e.row].push_back(e.col);
    for (auto& nb : in.neighbors) std::sort(nb.begin(), nb.end());
}

}  // namespace

GraphInput prepare_graph(const AstGraph& graph, const FeatureSpec& spec) {
    GraphInput in;
    in.n = static_cast<int>(graph.nodes.size());
    in.adjacency = to_adjacency(graph, {EdgeKind::child, EdgeKind::next_sibling}, true, true);
    for (const auto& node : graph.nodes) {
        in.kinds.push_back(static_cast<int>(node.kind));
        in.token_buckets.push_back(node.token ? token_bucket(*node.token, spec.hash_buckets) : -1);
    }
    finish_input(in);
    return in;
}

GraphInput batch_graphs(const std::vector<GraphInput>& parts) {
    GraphInput out;
    for (const auto& p : parts) {
        for (const auto& e : p.adjacency) out.adjacency.push_back({e.row + out.n, e.col + out.n, e.weight});
        out.kinds.insert(out.kinds.end(), p.kinds.begin(), p.kinds.end());
        out.token_buckets.insert(out.token_buckets.end(), p.token_buckets.begin(), p.token_buckets.end());
        out.n += p.n;
    }
    finish_input(out);
    return out;
}

Tensor node_features(const GraphInput& input, const FeatureSpec& spec, const Tensor& token_table) {
    if (token_table.rows() != spec.hash_buckets || token_table.cols() != spec.token_dim) {
        throw DimensionMismatch(fmt::format("token table is {}x{}, feature spec wants {}x{}", token_table.rows(),
                                            token_table.cols(), spec.hash_buckets, spec.token_dim));
    }
    Matrix one_hot = Matrix::Zero(input.n, spec.kind_dim);
    for (int i = 0; i < input.n; ++i) one_hot(i, input.kinds[i]) = 1.0;
    return nn::concat_cols({Tensor::constant(std::move(one_hot)), nn::gather_rows(token_table, input.token_buckets)});
}

// ---------------------------------------------------------------------------
// Layers

GcnLayer GcnLayer::init(int in_dim, int out_dim, Activation activation, std::mt19937_64& rng) {
    return GcnLayer{Tensor::parameter(nn::glorot(in_dim, out_dim, rng)), Tensor::zeros(1, out_dim, true), activation};
}

Tensor gcn_forward(const Tensor& H, const nn::SparseMatrix& norm_adj, const GcnLayer& layer) {
    if (H.cols() != layer.W.rows()) {
        throw DimensionMismatch(fmt::format("gcn: input has {} features, layer expects {}", H.cols(), layer.W.rows()));
    }
    return activate(nn::add_row(nn::spmm(norm_adj, nn::matmul(H, layer.W)), layer.b), layer.activation);
}

Tensor gcn_forward(const Tensor& H, const std::vector<AdjEntry>& adjacency, const GcnLayer& layer) {
    return gcn_forward(H, gcn_normalize(adjacency, static_cast<int>(H.rows())), layer);
}

GatLayer GatLayer::init(int in_dim, int out_dim, int heads, double leaky_slope, Activation activation,
                        std::mt19937_64& rng) {
    if (heads < 1 || out_dim % heads != 0) {
        throw InvalidArgument(fmt::format("gat: out_dim {} not divisible by {} heads", out_dim, heads));
    }
    const int hd = out_dim / heads;
    GatLayer l;
    l.W = Tensor::parameter(nn::glorot(in_dim, out_dim, rng));
    l.a_dst = Tensor::parameter(nn::glorot(heads, hd, rng));
    l.a_src = Tensor::parameter(nn::glorot(heads, hd, rng));
    l.heads = heads;
    l.leaky_slope = leaky_slope;
    l.activation = activation;
    return l;
}

Tensor gat_forward(const Tensor& H, const std::vector<std::vector<int>>& neighbors, const GatLayer& layer) {
    if (H.cols() != layer.W.rows()) {
        throw DimensionMismatch(fmt::format("gat: input has {} features, layer expects {}", H.cols(), layer.W.rows()));
    }
    Tensor z = nn::matmul(H, layer.W);
    return activate(nn::gat_aggregate(z, layer.a_dst, layer.a_src, neighbors, layer.heads, layer.leaky_slope),
                    layer.activation);
}

// ---------------------------------------------------------------------------
// Models

std::vector<std::pair<std::string, Tensor>> Model::named_parameters() const {
    std::vector<std::pair<std::string, Tensor>> out;
    if (config.task == Task::quality) {
        out.emplace_back("text.embedding", text.weights);
        out.emplace_back("quality.W", quality_W);
        out.emplace_back("quality.b", quality_b);
        return out;
    }
    out.emplace_back("token_table", graph.token_table);
    for (std::size_t i = 0; i < graph.gcn.size(); ++i) {
        out.emplace_back(fmt::format("gcn.{}.W", i), graph.gcn[i].W);
        out.emplace_back(fmt::format("gcn.{}.b", i), graph.gcn[i].b);
    }
    for (std::size_t i = 0; i < graph.gat.size(); ++i) {
        out.emplace_back(fmt::format("gat.{}.W", i), graph.gat[i].W);
        out.emplace_back(fmt::format("gat.{}.a_dst", i), graph.gat[i].a_dst);
        out.emplace_back(fmt::format("gat.{}.a_src", i), graph.gat[i].a_src);
    }
    out.emplace_back("head.W", graph.head_W);
    out.emplace_back("head.b", graph.head_b);
    return out;
}

Model init_graph_model(const ModelConfig& config, std::mt19937_64& rng) {
    config.validate();
    if (config.task == Task::quality) throw InvalidArgument("init_graph_model: QUALITY needs an encoder");
    Model m;
    m.config = config;
    std::normal_distribution<double> normal(0.0, 0.1);
    Matrix table(config.features.hash_buckets, config.features.token_dim);
    for (Eigen::Index i = 0; i < table.size(); ++i) table.data()[i] = normal(rng);
    m.graph.token_table = Tensor::parameter(std::move(table));
    int in = config.features.input_dim();
    for (int out : config.hidden_dims) {
        if (config.layer == LayerType::gcn) {
            m.graph.gcn.push_back(GcnLayer::init(in, out, Activation::relu, rng));
        } else {
            m.graph.gat.push_back(GatLayer::init(in, out, config.heads, config.leaky_slope, Activation::relu, rng));
        }
        in = out;
    }
    m.graph.head_W = Tensor::parameter(nn::glorot(in, config.output_dim(), rng));
    m.graph.head_b = Tensor::zeros(1, config.output_dim(), true);
    return m;
}

Model init_quality_model(const ModelConfig& config, std::shared_ptr<const Model> encoder, Vocabulary vocab,
                         std::mt19937_64& rng) {
    config.validate();
    if (config.task != Task::quality) throw InvalidArgument("init_quality_model: task must be QUALITY");
    if (!encoder || encoder->config.task == Task::quality) {
        throw ConfigMismatch("QUALITY needs a trained LIKELIHOOD or TOPIC model as its encoder");
    }
    if (encoder->config.features != config.features) {
        throw ConfigMismatch("encoder feature spec differs from the QUALITY model's");
    }
    Model m;
    m.config = config;
    m.encoder = std::move(encoder);
    m.vocab = std::move(vocab);
    m.text = EmbeddingTable::init(m.vocab.size(), config.text_dim, rng);
    const int in = config.text_dim + last_hidden(m.encoder->config);
    m.quality_W = Tensor::parameter(nn::glorot(in, 2, rng));
    m.quality_b = Tensor::zeros(1, 2, true);
    return m;
}

GraphOutputs forward_graph(const Model& model, const GraphInput& input, bool training, std::mt19937_64* rng) {
    if (model.config.task == Task::quality) throw ConfigMismatch("forward_graph: QUALITY model has no graph head");
    if (training && !rng) throw InvalidArgument("forward_graph: training needs an rng");
    const double p = training ? model.config.dropout : 0.0;
    std::mt19937_64 unused;
    std::mt19937_64& r = rng ? *rng : unused;
    Tensor h = node_features(input, model.config.features, model.graph.token_table);
    for (const auto& layer : model.graph.gcn) h = gcn_forward(nn::dropout(h, p, r, training), input.norm_adj, layer);
    for (const auto& layer : model.graph.gat) h = gat_forward(nn::dropout(h, p, r, training), input.neighbors, layer);
    Tensor logits = nn::add_row(nn::matmul(nn::dropout(h, p, r, training), model.graph.head_W), model.graph.head_b);
    return {h, logits};
}

Tensor forward_quality(const Model& model, const QualityInputs& inputs) {
    if (model.config.task != Task::quality) throw ConfigMismatch("forward_quality: not a QUALITY model");
    const auto n = static_cast<Eigen::Index>(inputs.comment_ids.size());
    const int hidden = last_hidden(model.encoder->config);
    if (inputs.node_embeddings.rows() != n || inputs.node_embeddings.cols() != hidden) {
        throw DimensionMismatch(fmt::format("quality: node embeddings are {}x{}, expected {}x{}",
                                            inputs.node_embeddings.rows(), inputs.node_embeddings.cols(), n, hidden));
    }
    Tensor x = nn::concat_cols({embed_comments(inputs.comment_ids, model.text), Tensor::constant(inputs.node_embeddings)});
    return nn::sigmoid(nn::add_row(nn::matmul(x, model.quality_W), model.quality_b));
}

Matrix predict_node_probabilities(const Model& model, const GraphInput& input) {
    Matrix logits = forward_graph(model, input, false, nullptr).logits.value();
    Matrix probs(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        auto row = logits.row(i);
        Eigen::RowVectorXd e = (row.array() - row.maxCoeff()).exp();
        probs.row(i) = e / e.sum();
    }
    return probs;
}

Matrix encode_nodes(const Model& model, const GraphInput& input) {
    return forward_graph(model, input, false, nullptr).embeddings.value();
}

// ---------------------------------------------------------------------------
// Datasets

TaskDataset node_dataset(Task task, const std::vector<LabeledGraph>& graphs, const FeatureSpec& spec) {
    if (task == Task::quality) throw InvalidArgument("node_dataset: QUALITY examples are per comment");
    TaskDataset data;
    data.task = task;
    for (const auto& lg : graphs) {
        GraphExample ex;
        ex.pr_id = lg.provenance.pr_id;
        ex.file_path = lg.provenance.file_path;
        ex.revision_index = lg.provenance.revision_index;
        ex.input = prepare_graph(lg.graph, spec);
        for (const auto& l : lg.labels) {
            if (task == Task::likelihood) {
                ex.labels.push_back(l.commented == Commented::positive ? 1 : 0);
                ex.mask.push_back(l.commented != Commented::unknown);
            } else {
                ex.labels.push_back(l.topic ? static_cast<int>(*l.topic) : 0);
                ex.mask.push_back(l.commented == Commented::positive && l.topic.has_value());
            }
        }
        data.graphs.push_back(std::move(ex));
    }
    return data;
}

TaskDataset quality_dataset(const ReviewCorpus& corpus, const std::set<std::string>& pr_ids, const FeatureSpec& spec) {
    TaskDataset data;
    data.task = Task::quality;
    for (const auto& pr : corpus.pull_requests) {
        if (!pr_ids.count(pr.id)) continue;
        std::map<std::pair<std::string, int>, std::optional<AstGraph>> parsed;
        for (const auto& c : pr.comments) {
            auto key = std::make_pair(c.file_path, c.revision_index);
            auto it = parsed.find(key);
            if (it == parsed.end()) {
                std::optional<AstGraph> g;
                if (const FileRevision* rev = pr.find_revision(c.file_path, c.revision_index)) {
                    try {
                        g = parse_source(rev->content, rev->file_path, rev->revision_index);
                    } catch (const SyntaxError& e) {
                        log::warn("skipping comments on unparsable revision {} {}#{}: {}", pr.id, c.file_path,
                                  c.revision_index, e.what());
                    }
                }
                it = parsed.emplace(key, std::move(g)).first;
            }
            if (!it->second) continue;
            QualityLabel q = quality_labels(pr, c, *it->second);
            CommentExample ex;
            ex.pr_id = pr.id;
            ex.comment_id = c.id;
            ex.tokens = tokenize(c.body);
            ex.graph = prepare_graph(*it->second, spec);
            ex.anchored_node = q.anchored_node;
            ex.actionability = q.actionability;
            ex.clarity = q.clarity;
            data.comments.push_back(std::move(ex));
        }
    }
    return data;
}

// ---------------------------------------------------------------------------
// Training

namespace {

std::vector<Tensor> parameter_list(const Model& m) {
    std::vector<Tensor> out;
    for (auto& [name, t] : m.named_parameters()) out.push_back(t);
    return out;
}

nn::AdamConfig adam_config(const TrainConfig& c) { return {c.lr, c.beta1, c.beta2, c.eps, c.weight_decay}; }

void check_finite(double loss, int epoch) {
    if (!std::isfinite(loss)) throw InvalidArgument(fmt::format("training diverged: loss {} at epoch {}", loss, epoch));
}

Checkpoint train_nodes(const TaskDataset& data, const ModelConfig& mc, const TrainConfig& tc) {
    std::vector<GraphInput> parts;
    std::vector<int> labels;
    std::vector<bool> mask;
    for (const auto& g : data.graphs) {
        parts.push_back(g.input);
        labels.insert(labels.end(), g.labels.begin(), g.labels.end());
        mask.insert(mask.end(), g.mask.begin(), g.mask.end());
    }
    const int classes = mc.output_dim();
    std::vector<double> counts(classes, 0.0);
    double total = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!mask[i]) continue;
        counts[labels[i]] += 1;
        total += 1;
    }
    if (total == 0) throw EmptyDataset(fmt::format("no labeled nodes for task {}", task_name(data.task)));
    std::vector<double> weights = tc.class_weights;
    if (weights.empty()) {
        for (int c = 0; c < classes; ++c) weights.push_back(counts[c] > 0 ? total / (classes * counts[c]) : 0.0);
    } else if (static_cast<int>(weights.size()) != classes) {
        throw InvalidArgument(fmt::format("{} class weights for {} classes", weights.size(), classes));
    }

    std::mt19937_64 rng(tc.seed);
    auto model = std::make_shared<Model>(init_graph_model(mc, rng));
    GraphInput batch = batch_graphs(parts);
    std::vector<Tensor> params = parameter_list(*model);
    nn::AdamState state;
    Checkpoint ck;
    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        for (auto& p : params) p.zero_grad();
        Tensor loss = nn::masked_cross_entropy(forward_graph(*model, batch, true, &rng).logits, labels, mask, weights);
        nn::backward(loss);
        nn::adam_step(params, state, adam_config(tc));
        check_finite(loss.item(), epoch);
        ck.epoch_losses.push_back(loss.item());
    }
    ck.model = std::move(model);
    return ck;
}

Checkpoint train_quality(const TaskDataset& data, const ModelConfig& mc, const TrainConfig& tc,
                         std::shared_ptr<const Model> encoder) {
    if (data.comments.empty()) throw EmptyDataset("no comments for task quality");
    std::vector<std::vector<std::string>> docs;
    for (const auto& c : data.comments) docs.push_back(c.tokens);
    Vocabulary vocab = build_vocabulary(docs, mc.vocab_min_df, mc.vocab_max_size);

    std::mt19937_64 rng(tc.seed);
    auto model = std::make_shared<Model>(init_quality_model(mc, std::move(encoder), std::move(vocab), rng));
    QualityInputs inputs;
    const auto n = static_cast<Eigen::Index>(data.comments.size());
    inputs.node_embeddings = Matrix(n, last_hidden(model->encoder->config));
    Matrix act(n, 1);
    Matrix clarity(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& c = data.comments[i];
        inputs.comment_ids.push_back(model->vocab.encode(c.tokens));
        inputs.node_embeddings.row(i) = encode_nodes(*model->encoder, c.graph).row(c.anchored_node);
        act(i, 0) = c.actionability;
        clarity(i, 0) = c.clarity;
    }
    std::vector<Tensor> params = parameter_list(*model);
    nn::AdamState state;
    Checkpoint ck;
    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        for (auto& p : params) p.zero_grad();
        Tensor out = forward_quality(*model, inputs);
        Tensor loss = nn::add(nn::bce_loss(nn::slice_cols(out, 0, 1), act), nn::mse_loss(nn::slice_cols(out, 1, 1), clarity));
        nn::backward(loss);
        nn::adam_step(params, state, adam_config(tc));
        check_finite(loss.item(), epoch);
        ck.epoch_losses.push_back(loss.item());
    }
    ck.model = std::move(model);
    return ck;
}

}  // namespace

Checkpoint train(const TaskDataset& data, const ModelConfig& model_config, const TrainConfig& train_config,
                 std::shared_ptr<const Model> encoder) {
    model_config.validate();
    train_config.validate();
    if (data.task != model_config.task) {
        throw ConfigMismatch(fmt::format("dataset is for task {}, model for {}", task_name(data.task),
                                         task_name(model_config.task)));
    }
    Checkpoint ck = data.task == Task::quality ? train_quality(data, model_config, train_config, std::move(encoder))
                                               : train_nodes(data, model_config, train_config);
    ck.train = train_config;
    log::info("trained {} model: {} epochs, final loss {:.6f}", task_name(data.task), train_config.epochs,
              ck.epoch_losses.back());
    return ck;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

void write_tensors(std::string& out, const Model& m, const std::string& prefix, bool& first) {
    for (const auto& [name, t] : m.named_parameters()) {
        out += first ? "\n" : ",\n";
        first = false;
        out += fmt::format("  {}: {{\"shape\": [{}, {}], \"values\": [", json(prefix + name).dump(), t.rows(), t.cols());
        const Matrix& v = t.value();
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double x = v.data()[i];
            if (!std::isfinite(x)) throw InvalidArgument(fmt::format("tensor {} holds a non-finite value", name));
            if (i) out += ", ";
            out += fmt::format("{:.17g}", x);
        }
        out += "]}";
    }
}

void load_tensors(Model& m, const json& tensors, const std::string& prefix) {
    for (auto& [name, t] : m.named_parameters()) {
        const std::string key = prefix + name;
        if (!tensors.contains(key)) throw SchemaError("checkpoint", "tensors", "missing tensor '" + key + "'");
        const auto& jt = tensors.at(key);
        auto shape = jt.at("shape").get<std::vector<long>>();
        auto values = jt.at("values").get<std::vector<double>>();
        if (shape.size() != 2 || shape[0] != t.rows() || shape[1] != t.cols() ||
            static_cast<long>(values.size()) != t.rows() * t.cols()) {
            throw ConfigMismatch(fmt::format("tensor '{}' does not match the model config", key));
        }
        Matrix& v = t.mutable_value();
        std::copy(values.begin(), values.end(), v.data());
    }
}

std::shared_ptr<Model> graph_model_from(const json& config, const json& tensors, const std::string& prefix) {
    ModelConfig mc = model_config_from_json(config);
    std::mt19937_64 rng(0);
    auto m = std::make_shared<Model>(init_graph_model(mc, rng));
    load_tensors(*m, tensors, prefix);
    return m;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
    const Model& m = *ck.model;
    json config = to_json(m.config);
    if (m.encoder) config["encoder"] = to_json(m.encoder->config);
    json metadata = {{"task", task_name(m.config.task)},
                     {"seed", ck.train.seed},
                     {"epochs", ck.train.epochs},
                     {"final_loss", ck.epoch_losses.empty() ? json(nullptr) : json(ck.epoch_losses.back())},
                     {"epoch_losses", ck.epoch_losses},
                     {"train_config", to_json(ck.train)},
                     {"run_config", ck.run_config}};

    std::string out = "{\n";
    out += fmt::format("\"format_version\": {},\n", Checkpoint::kFormatVersion);
    out += "\"model_config\": " + config.dump() + ",\n";
    out += "\"vocabulary\": " + to_json(m.vocab).dump() + ",\n";
    out += "\"tensors\": {";
    bool first = true;
    if (m.encoder) write_tensors(out, *m.encoder, "encoder.", first);
    write_tensors(out, m, "", first);
    out += "\n},\n";
    out += "\"metadata\": " + metadata.dump() + "\n}\n";
    return out;
}

Checkpoint parse_checkpoint(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError("checkpoint", "<document>", e.what());
    }
    Checkpoint ck;
    try {
        const int version = j.at("format_version").get<int>();
        if (version != Checkpoint::kFormatVersion) {
            throw SchemaError("checkpoint", "format_version", fmt::format("unsupported version {}", version));
        }
        const json& config = j.at("model_config");
        const json& tensors = j.at("tensors");
        ModelConfig mc = model_config_from_json(config);
        if (mc.task == Task::quality) {
            if (!config.contains("encoder")) throw SchemaError("checkpoint", "model_config", "QUALITY without encoder");
            std::shared_ptr<const Model> encoder = graph_model_from(config.at("encoder"), tensors, "encoder.");
            Vocabulary vocab = vocabulary_from_json(j.at("vocabulary"));
            std::mt19937_64 rng(0);
            ck.model = std::make_shared<Model>(init_quality_model(mc, encoder, std::move(vocab), rng));
            load_tensors(*ck.model, tensors, "");
        } else {
            ck.model = graph_model_from(config, tensors, "");
            ck.model->vocab = vocabulary_from_json(j.at("vocabulary"));
        }
        const json& meta = j.at("metadata");
        ck.train = train_config_from_json(meta.at("train_config"));
        ck.epoch_losses = meta.at("epoch_losses").get<std::vector<double>>();
        ck.run_config = meta.value("run_config", json::object());
    } catch (const json::exception& e) {
        throw SchemaError("checkpoint", "<document>", e.what());
    }
    return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    std::string text = serialize_checkpoint(checkpoint);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write checkpoint '{}'", path.string()));
    out << text;
    if (!out) throw IoError(fmt::format("failed writing checkpoint '{}'", path.string()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read checkpoint '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_checkpoint(ss.str());
}

}  // namespace mcrg
