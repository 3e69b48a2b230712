#pragma once

// Synthetic labeled corpora with a known labeling rule. The rule is the
// oracle: a model that learned it reproduces these labels.

#include "mcrg/graphlearn.hpp"
#include "mcrg/labeling.hpp"

#include <random>
#include <vector>

namespace planted {

bool inside_if(const mcrg::AstGraph& g, int node);

// Every node labeled: POSITIVE iff it is a RETURN with an IF ancestor.
std::vector<mcrg::LabeledGraph> return_in_if(std::mt19937_64& rng, int count);

// Statement nodes POSITIVE with a topic: RETURN under an IF -> BUG, other
// RETURN -> USECASE, VAR_DECL -> STYLE, WHILE/FOR -> STRUCTURE,
// IF -> OTHER. Everything else UNKNOWN.
std::vector<mcrg::LabeledGraph> five_topics(std::mt19937_64& rng, int count);

// Model config for planted-rule runs: the defaults without dropout, which
// underfits 24 small graphs within 200 epochs.
mcrg::ModelConfig harness_config(mcrg::Task task);

struct Split {
    std::vector<mcrg::LabeledGraph> train;
    std::vector<mcrg::LabeledGraph> test;
};

// All but the last 6 graphs train; the last 6 are held out.
Split split(std::vector<mcrg::LabeledGraph> graphs);

struct Accuracy {
    double accuracy = 0;
    double positive_recall = 0;
};

// Argmax accuracy over masked nodes, and recall of class 1.
Accuracy node_accuracy(const mcrg::Model& model, const mcrg::TaskDataset& data);
double macro_f1(const mcrg::Model& model, const mcrg::TaskDataset& data);

}  // namespace planted
