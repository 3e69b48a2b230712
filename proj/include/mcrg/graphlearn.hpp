#pragma once

#include "mcrg/ast.hpp"
#include "mcrg/corpus.hpp"
#include "mcrg/labeling.hpp"
#include "mcrg/tensor.hpp"
#include "mcrg/textrep.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace mcrg {

enum class Task { likelihood, topic, quality };
enum class LayerType { gcn, gat };
enum class Activation { relu, identity };

std::string_view task_name(Task task);  // "likelihood", "topic", "quality"
Task task_from_name(std::string_view name);  // throws InvalidArgument
std::string_view layer_type_name(LayerType type);
LayerType layer_type_from_name(std::string_view name);

struct FeatureSpec {
    int kind_dim = static_cast<int>(kNodeKindCount);
    int token_dim = 16;
    int hash_buckets = 1024;

    int input_dim() const { return kind_dim + token_dim; }
    bool operator==(const FeatureSpec&) const = default;
};

struct ModelConfig {
    Task task = Task::likelihood;
    LayerType layer = LayerType::gcn;
    std::vector<int> hidden_dims = {64, 64};
    double dropout = 0.5;
    int heads = 4;  // GAT only; every hidden dim must be divisible by it
    double leaky_slope = 0.2;
    FeatureSpec features;
    // QUALITY only.
    int text_dim = 32;
    int vocab_min_df = 2;
    int vocab_max_size = 5000;

    int output_dim() const;  // 2, 5 or 2
    // Throws InvalidArgument on inconsistent values.
    void validate() const;
};

struct TrainConfig {
    double lr = 0.01;
    int epochs = 200;
    std::uint64_t seed = 0;
    double weight_decay = 5e-4;
    // Empty: inverse class frequency N / (C * n_c) over the training labels.
    std::vector<double> class_weights;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const;
};

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Graph inputs

// Structure and feature indices of one (or a batch of) AST graphs. Edges
// are CHILD and NEXT_SIBLING, symmetrized, with self-loops.
struct GraphInput {
    int n = 0;
    std::vector<AdjEntry> adjacency;
    nn::SparseMatrix norm_adj;                // D^-1/2 (A + I) D^-1/2
    std::vector<std::vector<int>> neighbors;  // sorted, each includes the node
    std::vector<int> kinds;
    std::vector<int> token_buckets;  // -1 when the node has no token
};

int token_bucket(const std::string& token, int hash_buckets);
GraphInput prepare_graph(const AstGraph& graph, const FeatureSpec& spec);
// Block-diagonal union; node ids of part k are offset by the sizes before it.
GraphInput batch_graphs(const std::vector<GraphInput>& parts);

// Symmetric normalization of an adjacency that already has self-loops.
nn::SparseMatrix gcn_normalize(const std::vector<AdjEntry>& adjacency, int n);

// One-hot kind columns followed by the hashed token embedding row (zero for
// tokenless nodes): n x (kind_dim + token_dim).
nn::Tensor node_features(const GraphInput& input, const FeatureSpec& spec, const nn::Tensor& token_table);

// ---------------------------------------------------------------------------
// Layers

struct GcnLayer {
    nn::Tensor W;  // in x out
    nn::Tensor b;  // 1 x out
    Activation activation = Activation::relu;

    static GcnLayer init(int in_dim, int out_dim, Activation activation, std::mt19937_64& rng);
};

// sigma(D^-1/2 A D^-1/2 H W + b) with A given with self-loops.
nn::Tensor gcn_forward(const nn::Tensor& H, const nn::SparseMatrix& norm_adj, const GcnLayer& layer);
nn::Tensor gcn_forward(const nn::Tensor& H, const std::vector<AdjEntry>& adjacency, const GcnLayer& layer);

struct GatLayer {
    nn::Tensor W;      // in x (heads * head_dim); head h owns columns [h*hd, (h+1)*hd)
    nn::Tensor a_dst;  // heads x head_dim, applied to W h_i
    nn::Tensor a_src;  // heads x head_dim, applied to W h_j
    int heads = 1;
    double leaky_slope = 0.2;
    Activation activation = Activation::relu;

    static GatLayer init(int in_dim, int out_dim, int heads, double leaky_slope, Activation activation,
                         std::mt19937_64& rng);
};

nn::Tensor gat_forward(const nn::Tensor& H, const std::vector<std::vector<int>>& neighbors, const GatLayer& layer);

// ---------------------------------------------------------------------------
// Models

struct GraphEncoder {
    nn::Tensor token_table;  // hash_buckets x token_dim
    std::vector<GcnLayer> gcn;
    std::vector<GatLayer> gat;
    nn::Tensor head_W;  // last hidden x output_dim
    nn::Tensor head_b;
};

struct Model {
    ModelConfig config;
    GraphEncoder graph;
    // QUALITY: frozen node-embedding source plus the comment side.
    std::shared_ptr<const Model> encoder;
    Vocabulary vocab;
    EmbeddingTable text;
    nn::Tensor quality_W;  // (text_dim + encoder hidden) x 2
    nn::Tensor quality_b;

    // Trainable tensors by stable name, in a fixed order.
    std::vector<std::pair<std::string, nn::Tensor>> named_parameters() const;
};

// Graph model for LIKELIHOOD / TOPIC; QUALITY needs init_quality_model.
Model init_graph_model(const ModelConfig& config, std::mt19937_64& rng);
Model init_quality_model(const ModelConfig& config, std::shared_ptr<const Model> encoder, Vocabulary vocab,
                         std::mt19937_64& rng);

struct GraphOutputs {
    nn::Tensor embeddings;  // last hidden layer, n x hidden
    nn::Tensor logits;      // n x output_dim
};

// `rng` is only used when training (dropout).
GraphOutputs forward_graph(const Model& model, const GraphInput& input, bool training, std::mt19937_64* rng);

struct QualityInputs {
    std::vector<std::vector<int>> comment_ids;  // token ids per comment
    nn::Matrix node_embeddings;                 // anchored node's encoder embedding per comment
};

// n x 2 sigmoid outputs: (actionability probability, clarity estimate).
nn::Tensor forward_quality(const Model& model, const QualityInputs& inputs);

// Softmax rows of the graph logits (no dropout).
nn::Matrix predict_node_probabilities(const Model& model, const GraphInput& input);

// ---------------------------------------------------------------------------
// Datasets and training

struct GraphExample {
    std::string pr_id;
    std::string file_path;
    int revision_index = 0;
    GraphInput input;
    std::vector<int> labels;  // class per node; meaningful where mask is set
    std::vector<bool> mask;
};

struct CommentExample {
    std::string pr_id;
    std::string comment_id;
    std::vector<std::string> tokens;
    GraphInput graph;  // revision the comment was made on
    int anchored_node = 0;
    double actionability = 0;
    double clarity = 1;
};

struct TaskDataset {
    Task task = Task::likelihood;
    std::vector<GraphExample> graphs;
    std::vector<CommentExample> comments;
};

// LIKELIHOOD: POSITIVE = 1, NEGATIVE = 0, UNKNOWN masked. TOPIC: POSITIVE
// nodes labelled by topic, all others masked.
TaskDataset node_dataset(Task task, const std::vector<LabeledGraph>& graphs, const FeatureSpec& spec);
// One example per comment of the given pull requests whose revision parses.
TaskDataset quality_dataset(const ReviewCorpus& corpus, const std::set<std::string>& pr_ids, const FeatureSpec& spec);

struct Checkpoint {
    static constexpr int kFormatVersion = 1;

    std::shared_ptr<Model> model;
    TrainConfig train;
    std::vector<double> epoch_losses;
    nlohmann::json run_config = nlohmann::json::object();
};

// Full-batch training, one Adam step per epoch. QUALITY requires a trained
// LIKELIHOOD model as `encoder` and builds its vocabulary from the training
// comments. Throws EmptyDataset when nothing is labeled.
Checkpoint train(const TaskDataset& data, const ModelConfig& model_config, const TrainConfig& train_config,
                 std::shared_ptr<const Model> encoder = nullptr);

// Node embeddings from a graph model, detached from the tape.
nn::Matrix encode_nodes(const Model& model, const GraphInput& input);

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::string_view text);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mcrg
