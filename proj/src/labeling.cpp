#include "mcrg/labeling.hpp"

#include "mcrg/errors.hpp"
#include "mcrg/hash.hpp"
#include "mcrg/log.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>

namespace mcrg {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kMetaTopicCount> kTopicNames = {"STYLE", "STRUCTURE", "BUG", "USECASE",
                                                                       "OTHER"};

struct KeywordRule {
    MetaTopic topic;
    std::vector<std::string_view> keywords;
};

// Checked in priority order.
const std::vector<KeywordRule>& keyword_table() {
    static const std::vector<KeywordRule> table = {
        {MetaTopic::bug,
         {"bug", "crash", "null pointer", "exception", "overflow", "leak", "race", "incorrect", "wrong result"}},
        {MetaTopic::usecase, {"requirement", "use case", "spec", "expected behavior", "user story"}},
        {MetaTopic::structure, {"refactor", "extract", "split", "duplicate", "coupling", "move this", "complexity"}},
        {MetaTopic::style,
         {"rename", "naming", "format", "indent", "typo", "convention", "readability", "comment style"}},
    };
    return table;
}

const FileRevision& require_revision(const PullRequest& pr, const std::string& file_path, int revision_index) {
    const FileRevision* rev = pr.find_revision(file_path, revision_index);
    if (!rev) {
        throw RevisionMismatch(fmt::format("pull request '{}' has no revision {} of '{}'", pr.id, revision_index,
                                           file_path));
    }
    return *rev;
}

void check_graph_matches(const AstGraph& graph, const FileRevision& rev) {
    if (graph.line_count != line_count(rev.content)) {
        throw RevisionMismatch(fmt::format("graph of '{}'#{} has {} lines, revision has {}", graph.file_path,
                                           graph.revision_index, graph.line_count, line_count(rev.content)));
    }
}

// Carries new-file line numbers of revision `from` over to revision `to`,
// dropping lines that do not survive.
std::set<int> map_lines(const PullRequest& pr, const std::string& file_path, std::set<int> lines, int from, int to) {
    auto revs = pr.file_revisions(file_path);
    if (from < to) {
        for (int k = from + 1; k <= to; ++k) {
            std::set<int> next;
            for (int l : lines) {
                if (auto m = map_line_forward(revs[k]->hunks, l)) next.insert(*m);
            }
            lines = std::move(next);
        }
    } else {
        for (int k = from; k > to; --k) {
            std::set<int> next;
            for (int l : lines) {
                if (auto m = map_line_backward(revs[k]->hunks, l)) next.insert(*m);
            }
            lines = std::move(next);
        }
    }
    return lines;
}

std::set<int> span_lines(const Span& s) {
    std::set<int> out;
    for (int l = s.line_start; l <= s.line_end; ++l) out.insert(l);
    return out;
}

}  // namespace

std::string_view topic_name(MetaTopic topic) { return kTopicNames[static_cast<std::size_t>(topic)]; }

std::optional<MetaTopic> topic_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kTopicNames.size(); ++i) {
        if (kTopicNames[i] == name) return static_cast<MetaTopic>(i);
    }
    return std::nullopt;
}

int topic_priority(MetaTopic topic) {
    switch (topic) {
        case MetaTopic::bug: return 4;
        case MetaTopic::usecase: return 3;
        case MetaTopic::structure: return 2;
        case MetaTopic::style: return 1;
        case MetaTopic::other: return 0;
    }
    return 0;
}

std::string_view commented_name(Commented c) {
    switch (c) {
        case Commented::positive: return "POSITIVE";
        case Commented::negative: return "NEGATIVE";
        case Commented::unknown: return "UNKNOWN";
    }
    return "UNKNOWN";
}

std::set<int> anchoring_lines(const ReviewComment& comment, const std::set<int>& changed) {
    std::set<int> out;
    for (int l = comment.line_start; l <= comment.line_end; ++l) {
        if (changed.count(l)) out.insert(l);
    }
    if (out.empty()) {
        for (int l = comment.line_start; l <= comment.line_end; ++l) out.insert(l);
    }
    return out;
}

int anchor_comment(const AstGraph& graph, const ReviewComment& comment, const std::set<int>& changed) {
    auto lines = anchoring_lines(comment, changed);
    return node_span_cover(graph, *lines.begin(), *lines.rbegin());
}

MetaTopic weak_topic_label(std::string_view body) {
    std::string lower(body);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const auto& rule : keyword_table()) {
        for (auto kw : rule.keywords) {
            if (lower.find(kw) != std::string::npos) return rule.topic;
        }
    }
    return MetaTopic::other;
}

MetaTopic comment_topic(const ReviewComment& comment) {
    if (comment.topic_override) {
        if (auto t = topic_from_name(*comment.topic_override)) return *t;
    }
    return weak_topic_label(comment.body);
}

LabeledGraph label_graph(const AstGraph& graph, std::span<const ReviewComment> comments, const PullRequest& pr,
                         int stability_window) {
    if (stability_window < 1) throw InvalidArgument("stability window must be >= 1");
    const FileRevision& rev = require_revision(pr, graph.file_path, graph.revision_index);
    check_graph_matches(graph, rev);
    const std::string& file = graph.file_path;
    const int r = graph.revision_index;
    const std::set<int> changed = changed_lines(rev);
    const int remaining = pr.last_revision_index(file) - r;
    const int needed = std::min(stability_window, remaining);
    const std::size_t n = graph.nodes.size();

    // Pre-order ids: the subtree of u is [u, u + subtree_size[u]).
    std::vector<int> subtree_size(n, 1);
    for (std::size_t i = n; i-- > 1;) subtree_size[graph.parent[i]] += subtree_size[i];

    // Nodes on the path to an anchor, or below one, are never negative.
    std::map<int, MetaTopic> positive;
    std::vector<bool> near_anchor(n, false);
    auto mark_anchor = [&](int node) {
        for (int u = node; u >= 0; u = graph.parent[u]) near_anchor[u] = true;
        for (int u = node; u < node + subtree_size[node]; ++u) near_anchor[u] = true;
    };
    for (const auto& c : comments) {
        if (c.file_path != file || c.pr_id != pr.id) continue;
        if (c.revision_index == r) {
            int a = anchor_comment(graph, c, changed);
            MetaTopic t = comment_topic(c);
            auto [it, inserted] = positive.emplace(a, t);
            if (!inserted && topic_priority(t) > topic_priority(it->second)) it->second = t;
            mark_anchor(a);
            continue;
        }
        const FileRevision* crev = pr.find_revision(file, c.revision_index);
        if (!crev) continue;
        auto mapped = map_lines(pr, file, anchoring_lines(c, changed_lines(*crev)), c.revision_index, r);
        if (mapped.empty() || *mapped.begin() > graph.line_count) continue;
        mark_anchor(node_span_cover(graph, *mapped.begin(), *mapped.rbegin()));
    }

    LabeledGraph out;
    out.graph = graph;
    out.provenance = LabelProvenance{pr.id, file, r, stability_window};
    out.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        NodeLabel label{static_cast<int>(i), Commented::unknown, std::nullopt};
        if (auto it = positive.find(static_cast<int>(i)); it != positive.end()) {
            label.commented = Commented::positive;
            label.topic = it->second;
        } else if (!near_anchor[i]) {
            const Span& s = graph.nodes[i].span;
            auto first_changed = changed.lower_bound(s.line_start);
            bool overlaps = first_changed != changed.end() && *first_changed <= s.line_end;
            if (overlaps && stability_horizon(pr, file, span_lines(s), r) >= needed) {
                label.commented = Commented::negative;
            }
        }
        out.labels.push_back(label);
    }
    return out;
}

QualityLabel quality_labels(const PullRequest& pr, const ReviewComment& comment) {
    const FileRevision& rev = require_revision(pr, comment.file_path, comment.revision_index);
    return quality_labels(pr, comment, parse_source(rev.content, rev.file_path, rev.revision_index));
}

QualityLabel quality_labels(const PullRequest& pr, const ReviewComment& comment, const AstGraph& graph) {
    auto it = std::find_if(pr.comments.begin(), pr.comments.end(),
                           [&](const ReviewComment& c) { return c.id == comment.id; });
    if (it == pr.comments.end()) {
        throw RevisionMismatch(fmt::format("comment '{}' is not part of pull request '{}'", comment.id, pr.id));
    }
    const FileRevision& rev = require_revision(pr, comment.file_path, comment.revision_index);
    if (graph.file_path != comment.file_path || graph.revision_index != comment.revision_index) {
        throw RevisionMismatch(fmt::format("graph '{}'#{} does not match comment '{}'", graph.file_path,
                                           graph.revision_index, comment.id));
    }
    check_graph_matches(graph, rev);

    QualityLabel q;
    q.comment_id = comment.id;
    q.anchored_node = anchor_comment(graph, comment, changed_lines(rev));
    const int remaining = pr.last_revision_index(comment.file_path) - comment.revision_index;
    const int horizon = stability_horizon(pr, comment.file_path, span_lines(graph.nodes[q.anchored_node].span),
                                          comment.revision_index);
    q.actionability = horizon < remaining ? 1 : 0;
    int later = 0;
    for (const auto& c : pr.comments) {
        if (c.thread_id == comment.thread_id && c.created_at > comment.created_at) ++later;
    }
    q.clarity = 1.0 / (1.0 + later);
    return q;
}

bool assigned_to_train(const std::string& pr_id, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument(fmt::format("split ratio {} not in (0, 1)", ratio));
    std::string key(8, '\0');
    for (int i = 0; i < 8; ++i) key[i] = static_cast<char>((seed >> (8 * i)) & 0xff);
    key += pr_id;
    // Top 53 bits give an exact double in [0, 1).
    double u = static_cast<double>(stable_hash64(key) >> 11) * 0x1.0p-53;
    return u < ratio;
}

DatasetSplit split_dataset(const ReviewCorpus& corpus, double ratio, std::uint64_t seed) {
    DatasetSplit split;
    split.seed = seed;
    split.ratio = ratio;
    for (const auto& pr : corpus.pull_requests) {
        (assigned_to_train(pr.id, ratio, seed) ? split.train_pr_ids : split.test_pr_ids).insert(pr.id);
    }
    return split;
}

LabeledCorpus label_corpus(const ReviewCorpus& corpus, int stability_window) {
    LabeledCorpus out;
    for (const auto& pr : corpus.pull_requests) {
        for (const auto& path : pr.file_paths()) {
            for (const FileRevision* rev : pr.file_revisions(path)) {
                AstGraph graph;
                try {
                    graph = parse_source(rev->content, rev->file_path, rev->revision_index);
                } catch (const SyntaxError& e) {
                    std::string reason = fmt::format("{} {}#{}: {}", pr.id, path, rev->revision_index, e.what());
                    log::warn("skipping unparsable revision {}", reason);
                    out.skipped.push_back(std::move(reason));
                    continue;
                }
                out.graphs.push_back(label_graph(graph, pr.comments, pr, stability_window));
            }
        }
    }
    return out;
}

json to_json(const LabeledGraph& g) {
    json labels = json::array();
    for (const auto& l : g.labels) {
        json jl = {{"node_id", l.node_id}, {"commented", commented_name(l.commented)}};
        if (l.topic) jl["topic"] = topic_name(*l.topic);
        labels.push_back(std::move(jl));
    }
    return json{{"graph", to_json(g.graph)},
                {"labels", std::move(labels)},
                {"provenance",
                 {{"pr_id", g.provenance.pr_id},
                  {"file_path", g.provenance.file_path},
                  {"revision_index", g.provenance.revision_index},
                  {"stability_window", g.provenance.stability_window}}}};
}

LabeledGraph labeled_graph_from_json(const json& j) {
    LabeledGraph g;
    try {
        g.graph = graph_from_json(j.at("graph"));
        for (const auto& jl : j.at("labels")) {
            NodeLabel l;
            l.node_id = jl.at("node_id").get<int>();
            const std::string c = jl.at("commented").get<std::string>();
            if (c == "POSITIVE") l.commented = Commented::positive;
            else if (c == "NEGATIVE") l.commented = Commented::negative;
            else if (c == "UNKNOWN") l.commented = Commented::unknown;
            else throw SchemaError("labeled graph", "commented", "unknown label '" + c + "'");
            if (jl.contains("topic")) {
                auto t = topic_from_name(jl["topic"].get<std::string>());
                if (!t) throw SchemaError("labeled graph", "topic", "unknown meta-topic");
                l.topic = *t;
            }
            g.labels.push_back(l);
        }
        const json& p = j.at("provenance");
        g.provenance = LabelProvenance{p.at("pr_id").get<std::string>(), p.at("file_path").get<std::string>(),
                                       p.at("revision_index").get<int>(), p.at("stability_window").get<int>()};
    } catch (const json::exception& e) {
        throw SchemaError("labeled graph", "<document>", e.what());
    }
    if (g.labels.size() != g.graph.nodes.size()) {
        throw SchemaError("labeled graph", "labels", "label count differs from node count");
    }
    return g;
}

json to_json(const DatasetSplit& split) {
    return json{{"train_pr_ids", split.train_pr_ids},
                {"test_pr_ids", split.test_pr_ids},
                {"seed", split.seed},
                {"ratio", split.ratio}};
}

DatasetSplit split_from_json(const json& j) {
    DatasetSplit s;
    try {
        s.train_pr_ids = j.at("train_pr_ids").get<std::set<std::string>>();
        s.test_pr_ids = j.at("test_pr_ids").get<std::set<std::string>>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.ratio = j.at("ratio").get<double>();
    } catch (const json::exception& e) {
        throw SchemaError("split", "<document>", e.what());
    }
    for (const auto& id : s.train_pr_ids) {
        if (s.test_pr_ids.count(id)) throw SchemaError("split", "test_pr_ids", "'" + id + "' is on both sides");
    }
    return s;
}

}  // namespace mcrg
