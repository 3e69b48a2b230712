#pragma once

#include "mcrg/diff.hpp"
#include "mcrg/timestamp.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mcrg {

inline constexpr int kCorpusSchemaVersion = 1;

struct FileRevision {
    std::string pr_id;
    std::string file_path;
    int revision_index = 0;
    std::string content;
    std::vector<ChangeHunk> hunks;  // versus the previous revision; empty for index 0
};

struct ReviewComment {
    std::string id;
    std::string pr_id;
    std::string file_path;
    int revision_index = 0;
    int line_start = 1;  // 1-based inclusive, new-file coordinates
    int line_end = 1;
    std::string body;
    std::string author;  // pseudonym
    Timestamp created_at;
    std::string thread_id;
    std::optional<std::string> reply_to;
    // Human meta-topic label; when present it overrides the keyword labeler.
    std::optional<std::string> topic_override;
};

struct PullRequest {
    std::string id;
    std::string repo;
    Timestamp created_at;
    bool merged = false;
    std::vector<FileRevision> revisions;
    std::vector<ReviewComment> comments;

    // Revisions of one file ordered by index; empty when the file is unknown.
    std::vector<const FileRevision*> file_revisions(const std::string& file_path) const;
    const FileRevision* find_revision(const std::string& file_path, int revision_index) const;
    int last_revision_index(const std::string& file_path) const;
    std::vector<std::string> file_paths() const;
};

struct ReviewCorpus {
    int schema_version = kCorpusSchemaVersion;
    std::vector<PullRequest> pull_requests;

    const PullRequest* find(const std::string& pr_id) const;
};

// JSON-lines format: a header object {"schema_version": N} followed by one
// PullRequest object per line. An empty file is an empty corpus.
ReviewCorpus load_corpus(const std::filesystem::path& path);
ReviewCorpus parse_corpus(std::string_view text);
void save_corpus(const ReviewCorpus& corpus, const std::filesystem::path& path);
std::string serialize_corpus(const ReviewCorpus& corpus);

nlohmann::json to_json(const PullRequest& pr);
nlohmann::json to_json(const ChangeHunk& hunk);
// `record` names the location used in SchemaError messages.
PullRequest pull_request_from_json(const nlohmann::json& j, const std::string& record);

// Checks every documented invariant of the corpus types; throws SchemaError
// naming the offending record.
void validate_corpus(const ReviewCorpus& corpus);
void validate_pull_request(const PullRequest& pr, const std::string& record);

// New-file line numbers of ADDED lines; empty for revision 0.
std::set<int> changed_lines(const FileRevision& revision);

// Number of consecutive later revisions of `file_path` that leave `lines`
// (new-file coordinates of `from_revision`) untouched, counting through the
// final revision. Throws UnknownRevision.
int stability_horizon(const PullRequest& pr, const std::string& file_path, const std::set<int>& lines,
                      int from_revision);

struct CorpusStats {
    std::size_t n_prs = 0;
    std::size_t n_comments = 0;
    std::size_t n_revisions = 0;
    std::size_t n_threads = 0;
    // comments-per-PR -> number of PRs with that many comments
    std::map<std::size_t, std::size_t> comments_per_pr_histogram;

    bool operator==(const CorpusStats&) const = default;
};

CorpusStats corpus_stats(const ReviewCorpus& corpus);
nlohmann::json to_json(const CorpusStats& stats);

}  // namespace mcrg
