#include "mcrg/report.hpp"

#include "mcrg/diff.hpp"
#include "mcrg/errors.hpp"

#include <fmt/format.h>

namespace mcrg {

using nlohmann::json;

namespace {

void require_task(const Model& m, Task task) {
    if (m.config.task != task) {
        throw ConfigMismatch(fmt::format("expected a {} model, got {}", task_name(task), task_name(m.config.task)));
    }
    if (m.config.features.kind_dim != static_cast<int>(kNodeKindCount)) {
        throw ConfigMismatch(fmt::format("model expects {} node kinds, the parser has {}", m.config.features.kind_dim,
                                         kNodeKindCount));
    }
}

}  // namespace

ReportDocument predict_report(const AstGraph& graph, std::string_view source, const Model& likelihood,
                              const Model* topic, double threshold, std::span<const NodeLabel> gold,
                              std::string pr_id) {
    require_task(likelihood, Task::likelihood);
    if (topic) require_task(*topic, Task::topic);
    TextLines text = split_lines(source);
    if (static_cast<int>(text.lines.size()) != graph.line_count) {
        throw InvalidArgument(fmt::format("source has {} lines, graph {}", text.lines.size(), graph.line_count));
    }
    if (!gold.empty() && gold.size() != graph.size()) throw InvalidArgument("gold labels do not match the graph");

    ReportDocument doc;
    doc.pr_id = std::move(pr_id);
    doc.file_path = graph.file_path;
    doc.revision_index = graph.revision_index;
    doc.threshold = threshold;

    const nn::Matrix p = predict_node_probabilities(likelihood, prepare_graph(graph, likelihood.config.features));
    nn::Matrix t;
    if (topic) t = predict_node_probabilities(*topic, prepare_graph(graph, topic->config.features));
    for (const auto& node : graph.nodes) {
        PredictionRecord r;
        r.pr_id = doc.pr_id;
        r.file_path = graph.file_path;
        r.revision_index = graph.revision_index;
        r.node_id = node.id;
        r.kind = node.kind;
        r.line_start = node.span.line_start;
        r.line_end = node.span.line_end;
        r.likelihood = p(node.id, 1);
        if (topic) {
            Eigen::Index best;
            t.row(node.id).maxCoeff(&best);
            r.topic = static_cast<MetaTopic>(best);
            r.topic_scores.assign(t.row(node.id).data(), t.row(node.id).data() + t.cols());
        }
        if (!gold.empty()) r.gold = gold[node.id].commented;
        doc.records.push_back(std::move(r));
    }

    // An empty source still parses to a root, but has no lines to annotate.
    for (int line = 1; line <= graph.line_count; ++line) {
        ReportLine l;
        l.line = line;
        l.text = text.lines[line - 1];
        for (const auto& r : doc.records) {
            if (r.line_start > line || r.line_end < line) continue;
            if (l.node_id < 0 || r.likelihood > l.score) {
                l.score = r.likelihood;
                l.node_id = r.node_id;
                l.topic = r.topic;
            }
        }
        l.marked = l.score >= threshold;
        doc.lines.push_back(std::move(l));
    }
    return doc;
}

std::string render_report(std::span<const ReportDocument> documents) {
    std::string out;
    for (const auto& d : documents) {
        out += fmt::format("== {} {} revision {} threshold {:.3f}\n", d.pr_id.empty() ? "-" : d.pr_id, d.file_path,
                           d.revision_index, d.threshold);
        for (const auto& l : d.lines) {
            out += fmt::format("{:>5} {:.4f} {:<9} {} | {}\n", l.line, l.score, l.topic ? topic_name(*l.topic) : "-",
                               l.marked ? '*' : ' ', l.text);
        }
    }
    return out;
}

json to_json(const PredictionRecord& r) {
    json j = {{"pr_id", r.pr_id},
              {"file_path", r.file_path},
              {"revision_index", r.revision_index},
              {"node_id", r.node_id},
              {"kind", node_kind_name(r.kind)},
              {"line_start", r.line_start},
              {"line_end", r.line_end},
              {"likelihood", r.likelihood}};
    j["topic"] = r.topic ? json(topic_name(*r.topic)) : json(nullptr);
    j["topic_scores"] = r.topic_scores;
    j["gold"] = r.gold ? json(commented_name(*r.gold)) : json(nullptr);
    return j;
}

json to_json(const ReportDocument& d) {
    json lines = json::array();
    for (const auto& l : d.lines) {
        lines.push_back({{"line", l.line},
                         {"score", l.score},
                         {"node_id", l.node_id},
                         {"topic", l.topic ? json(topic_name(*l.topic)) : json(nullptr)},
                         {"marked", l.marked}});
    }
    json records = json::array();
    for (const auto& r : d.records) records.push_back(to_json(r));
    return {{"pr_id", d.pr_id},           {"file_path", d.file_path}, {"revision_index", d.revision_index},
            {"threshold", d.threshold},   {"lines", lines},           {"records", records}};
}

}  // namespace mcrg
