#pragma once

#include "mcrg/ast.hpp"
#include "mcrg/graphlearn.hpp"
#include "mcrg/labeling.hpp"

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcrg {

struct PredictionRecord {
    std::string pr_id;
    std::string file_path;
    int revision_index = 0;
    int node_id = 0;
    NodeKind kind = NodeKind::compilation_unit;
    int line_start = 1;
    int line_end = 1;
    double likelihood = 0;            // P(commented)
    std::optional<MetaTopic> topic;   // argmax of topic_scores
    std::vector<double> topic_scores;  // empty without a topic model
    std::optional<Commented> gold;
};

struct ReportLine {
    int line = 1;
    std::string text;
    double score = 0;  // max likelihood of the nodes covering the line
    int node_id = -1;  // node that attains the score, -1 when none covers it
    std::optional<MetaTopic> topic;
    bool marked = false;  // score >= threshold
};

struct ReportDocument {
    std::string pr_id;
    std::string file_path;
    int revision_index = 0;
    double threshold = 0.5;
    std::vector<ReportLine> lines;  // every source line, in order
    std::vector<PredictionRecord> records;  // by node id
};

// Scores every node of `graph` and annotates each line of `source`. Throws
// ConfigMismatch when `likelihood` is not a LIKELIHOOD model or `topic` not
// a TOPIC model, InvalidArgument when `source` and `graph` disagree on the
// line count or `gold` does not match the graph.
ReportDocument predict_report(const AstGraph& graph, std::string_view source, const Model& likelihood,
                              const Model* topic, double threshold, std::span<const NodeLabel> gold = {},
                              std::string pr_id = {});

// Plain-text listing of the documents, in the given order.
std::string render_report(std::span<const ReportDocument> documents);

nlohmann::json to_json(const PredictionRecord& record);
nlohmann::json to_json(const ReportDocument& document);

}  // namespace mcrg
