#include "planted.hpp"

#include "oracles.hpp"

#include "mcrg/ast.hpp"

#include <string>

namespace planted {

using mcrg::Commented;
using mcrg::MetaTopic;
using mcrg::NodeKind;

bool inside_if(const mcrg::AstGraph& g, int node) {
    for (int u = g.parent[node]; u >= 0; u = g.parent[u]) {
        if (g.nodes[u].kind == NodeKind::if_stmt) return true;
    }
    return false;
}

namespace {

template <typename Rule>
std::vector<mcrg::LabeledGraph> generate(std::mt19937_64& rng, int count, Rule rule) {
    std::vector<mcrg::LabeledGraph> out;
    for (int i = 0; i < count; ++i) {
        oracle::GenOptions opt;
        opt.classes = 1;
        opt.methods = 3;
        opt.statements = 4;
        opt.max_depth = 1;
        const std::string path = "Planted" + std::to_string(i) + ".mj";
        mcrg::LabeledGraph lg;
        lg.graph = mcrg::parse_source(oracle::random_minij(rng, opt), path, 0);
        lg.provenance = {"planted#" + std::to_string(i), path, 0, 1};
        for (int u = 0; u < static_cast<int>(lg.graph.nodes.size()); ++u) lg.labels.push_back(rule(lg.graph, u));
        out.push_back(std::move(lg));
    }
    return out;
}

}  // namespace

std::vector<mcrg::LabeledGraph> return_in_if(std::mt19937_64& rng, int count) {
    return generate(rng, count, [](const mcrg::AstGraph& g, int u) {
        bool pos = g.nodes[u].kind == NodeKind::return_stmt && inside_if(g, u);
        return mcrg::NodeLabel{u, pos ? Commented::positive : Commented::negative,
                               pos ? std::optional<MetaTopic>(MetaTopic::bug) : std::nullopt};
    });
}

std::vector<mcrg::LabeledGraph> five_topics(std::mt19937_64& rng, int count) {
    return generate(rng, count, [](const mcrg::AstGraph& g, int u) {
        std::optional<MetaTopic> t;
        switch (g.nodes[u].kind) {
            case NodeKind::return_stmt: t = inside_if(g, u) ? MetaTopic::bug : MetaTopic::usecase; break;
            case NodeKind::var_decl: t = MetaTopic::style; break;
            case NodeKind::while_stmt:
            case NodeKind::for_stmt: t = MetaTopic::structure; break;
            case NodeKind::if_stmt: t = MetaTopic::other; break;
            default: break;
        }
        return mcrg::NodeLabel{u, t ? Commented::positive : Commented::unknown, t};
    });
}

mcrg::ModelConfig harness_config(mcrg::Task task) {
    mcrg::ModelConfig mc;
    mc.task = task;
    mc.dropout = 0.0;
    return mc;
}

Split split(std::vector<mcrg::LabeledGraph> graphs) {
    Split s;
    const std::size_t held_out = graphs.size() >= 6 ? graphs.size() - 6 : 0;
    for (std::size_t i = 0; i < graphs.size(); ++i) (i < held_out ? s.train : s.test).push_back(std::move(graphs[i]));
    return s;
}

Accuracy node_accuracy(const mcrg::Model& model, const mcrg::TaskDataset& data) {
    int correct = 0, total = 0, pos = 0, pos_hit = 0;
    for (const auto& g : data.graphs) {
        mcrg::nn::Matrix p = mcrg::predict_node_probabilities(model, g.input);
        for (int i = 0; i < g.input.n; ++i) {
            if (!g.mask[i]) continue;
            Eigen::Index arg;
            p.row(i).maxCoeff(&arg);
            correct += arg == g.labels[i];
            ++total;
            if (g.labels[i] == 1) {
                ++pos;
                pos_hit += arg == 1;
            }
        }
    }
    return {static_cast<double>(correct) / total, pos ? static_cast<double>(pos_hit) / pos : 1.0};
}

double macro_f1(const mcrg::Model& model, const mcrg::TaskDataset& data) {
    const int c = model.config.output_dim();
    std::vector<double> tp(c), fp(c), fn(c);
    for (const auto& g : data.graphs) {
        mcrg::nn::Matrix p = mcrg::predict_node_probabilities(model, g.input);
        for (int i = 0; i < g.input.n; ++i) {
            if (!g.mask[i]) continue;
            Eigen::Index arg;
            p.row(i).maxCoeff(&arg);
            if (arg == g.labels[i]) {
                tp[arg] += 1;
            } else {
                fp[arg] += 1;
                fn[g.labels[i]] += 1;
            }
        }
    }
    double sum = 0;
    for (int k = 0; k < c; ++k) sum += tp[k] == 0 ? 0.0 : 2 * tp[k] / (2 * tp[k] + fp[k] + fn[k]);
    return sum / c;
}

}  // namespace planted
