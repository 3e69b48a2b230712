#pragma once

#include "mcrg/ast.hpp"
#include "mcrg/corpus.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcrg {

enum class MetaTopic { style, structure, bug, usecase, other };

inline constexpr std::size_t kMetaTopicCount = 5;

// Upper-case wire names ("STYLE", ...).
std::string_view topic_name(MetaTopic topic);
std::optional<MetaTopic> topic_from_name(std::string_view name);
// BUG > USECASE > STRUCTURE > STYLE > OTHER.
int topic_priority(MetaTopic topic);

enum class Commented { positive, negative, unknown };

std::string_view commented_name(Commented c);

struct NodeLabel {
    int node_id = 0;
    Commented commented = Commented::unknown;
    std::optional<MetaTopic> topic;  // set exactly for positive nodes

    bool operator==(const NodeLabel&) const = default;
};

struct LabelProvenance {
    std::string pr_id;
    std::string file_path;
    int revision_index = 0;
    int stability_window = 2;
};

struct LabeledGraph {
    AstGraph graph;
    std::vector<NodeLabel> labels;  // labels[i] belongs to node i
    LabelProvenance provenance;
};

struct QualityLabel {
    std::string comment_id;
    int anchored_node = 0;
    int actionability = 0;  // 0 or 1
    double clarity = 1.0;   // 1 / (1 + later comments in the thread)
};

struct DatasetSplit {
    std::set<std::string> train_pr_ids;
    std::set<std::string> test_pr_ids;
    std::uint64_t seed = 0;
    double ratio = 0.8;
};

// Lines a comment anchors with: its range intersected with `changed`, or the
// raw range when the intersection is empty.
std::set<int> anchoring_lines(const ReviewComment& comment, const std::set<int>& changed);

// node_span_cover over the anchoring lines (min to max). Throws OutOfRange.
int anchor_comment(const AstGraph& graph, const ReviewComment& comment, const std::set<int>& changed);

// Keyword weak labeler; see docs/topics.md.
MetaTopic weak_topic_label(std::string_view body);
// The corpus override when present, the keyword label otherwise.
MetaTopic comment_topic(const ReviewComment& comment);

// POSITIVE: nodes anchored by comments on this revision. NEGATIVE: nodes
// overlapping the revision's changed lines that are neither an ancestor nor
// a descendant of any comment's anchor (comments from other revisions of
// the file are carried over by hunk line mapping) and whose lines stay
// untouched for min(W, remaining revisions) revisions. Everything else
// UNKNOWN. `comments` is usually
// pr.comments; entries for other files are ignored.
// Throws RevisionMismatch when the graph does not belong to `pr`, and
// InvalidArgument when W < 1.
LabeledGraph label_graph(const AstGraph& graph, std::span<const ReviewComment> comments, const PullRequest& pr,
                         int stability_window);

// Throws RevisionMismatch when the comment is not part of `pr`. The first
// overload parses the comment's revision itself.
QualityLabel quality_labels(const PullRequest& pr, const ReviewComment& comment);
QualityLabel quality_labels(const PullRequest& pr, const ReviewComment& comment, const AstGraph& graph);

// Train iff stable_hash64(seed bytes, pr_id) / 2^64 < ratio. Throws
// InvalidArgument unless 0 < ratio < 1.
bool assigned_to_train(const std::string& pr_id, double ratio, std::uint64_t seed);
DatasetSplit split_dataset(const ReviewCorpus& corpus, double ratio, std::uint64_t seed);

// Every labeled revision of every file in the corpus. Files that fail to
// parse are skipped with a logged reason.
struct LabeledCorpus {
    std::vector<LabeledGraph> graphs;
    std::vector<std::string> skipped;
};
LabeledCorpus label_corpus(const ReviewCorpus& corpus, int stability_window);

nlohmann::json to_json(const LabeledGraph& g);
LabeledGraph labeled_graph_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DatasetSplit& split);
DatasetSplit split_from_json(const nlohmann::json& j);

}  // namespace mcrg
