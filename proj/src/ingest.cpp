#include "mcrg/ingest.hpp"

#include "mcrg/errors.hpp"
#include "mcrg/hash.hpp"
#include "mcrg/log.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace mcrg {

using nlohmann::json;

std::string pseudonymize(const std::string& login, const std::string& salt) {
    return "u" + hex64(stable_hash64(salt + '\x1f' + login));
}

namespace {

// Export ids may be numbers (GitHub) or strings.
std::optional<std::string> id_text(const json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    return std::nullopt;
}

std::optional<std::string> string_field(const json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
}

std::optional<int> int_field(const json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end() || !it->is_number_integer()) return std::nullopt;
    return static_cast<int>(it->get<long long>());
}

struct Skip {
    std::string reason;
};

struct PendingComment {
    ReviewComment comment;
    std::string thread_key;
};

PullRequest map_pull_request(const json& doc, const NormalizeOptions& options,
                             std::vector<UnmappableRecord>& skipped) {
    if (!doc.is_object()) throw Skip{"document is not an object"};
    auto repo = string_field(doc, "repo");
    auto number = id_text(doc, "number");
    if (!repo || !number) throw Skip{"missing repo or number"};

    PullRequest pr;
    pr.id = *repo + "#" + *number;
    pr.repo = *repo;
    auto created = string_field(doc, "created_at");
    auto created_ts = created ? parse_rfc3339(*created) : std::nullopt;
    if (!created_ts) throw Skip{"missing or invalid created_at"};
    pr.created_at = *created_ts;
    if (auto it = doc.find("merged"); it != doc.end() && it->is_boolean()) {
        pr.merged = it->get<bool>();
    } else if (auto m = doc.find("merged_at"); m != doc.end()) {
        pr.merged = !m->is_null();
    }

    // (path, commit) -> revision index
    std::map<std::pair<std::string, std::string>, int> commit_index;
    std::map<std::string, int> line_counts;  // (path#index) -> lines
    const json files = doc.value("files", json::array());
    if (!files.is_array()) throw Skip{"files is not an array"};
    for (const auto& f : files) {
        auto path = string_field(f, "path");
        if (!path || path->empty()) throw Skip{"file entry without path"};
        const json revisions = f.value("revisions", json::array());
        if (!revisions.is_array() || revisions.empty()) throw Skip{"file '" + *path + "' has no revisions"};
        const std::string* previous = nullptr;
        int index = 0;
        for (const auto& r : revisions) {
            auto content = string_field(r, "content");
            if (!content) throw Skip{"revision of '" + *path + "' without content"};
            FileRevision rev;
            rev.pr_id = pr.id;
            rev.file_path = *path;
            rev.revision_index = index;
            rev.content = *content;
            if (previous) rev.hunks = compute_hunks(*previous, rev.content, options.diff_context);
            if (auto commit = id_text(r, "commit_id")) commit_index[{*path, *commit}] = index;
            line_counts[*path + "#" + std::to_string(index)] = line_count(rev.content);
            pr.revisions.push_back(std::move(rev));
            previous = &pr.revisions.back().content;
            ++index;
        }
    }
    std::stable_sort(pr.revisions.begin(), pr.revisions.end(), [](const auto& a, const auto& b) {
        return std::tie(a.file_path, a.revision_index) < std::tie(b.file_path, b.revision_index);
    });

    std::vector<PendingComment> pending;
    const json comments = doc.value("review_comments", json::array());
    if (!comments.is_array()) throw Skip{"review_comments is not an array"};
    for (const auto& jc : comments) {
        auto id = id_text(jc, "id");
        const std::string label = pr.id + " comment " + (id ? *id : std::string("<no id>"));
        auto reject = [&](const std::string& reason) {
            skipped.push_back({label, reason});
            log::warn("skipping {}: {}", label, reason);
        };
        if (!id) {
            reject("missing id");
            continue;
        }
        auto path = string_field(jc, "path");
        if (!path || path->empty()) {
            reject("missing file path");
            continue;
        }
        auto commit = id_text(jc, "commit_id");
        if (!commit) {
            reject("missing commit_id");
            continue;
        }
        auto rev = commit_index.find({*path, *commit});
        if (rev == commit_index.end()) {
            reject("commit '" + *commit + "' is not a known revision of '" + *path + "'");
            continue;
        }
        auto line = int_field(jc, "line");
        if (!line) {
            reject("missing line (outdated or file-level comment)");
            continue;
        }
        int start = int_field(jc, "start_line").value_or(*line);
        int n_lines = line_counts[*path + "#" + std::to_string(rev->second)];
        if (start < 1 || start > *line || *line > n_lines) {
            reject("line range outside the revision");
            continue;
        }
        auto body = string_field(jc, "body");
        auto ts_text = string_field(jc, "created_at");
        auto ts = ts_text ? parse_rfc3339(*ts_text) : std::nullopt;
        if (!body || !ts) {
            reject("missing body or created_at");
            continue;
        }
        std::string login;
        if (auto u = jc.find("user"); u != jc.end() && u->is_object()) login = u->value("login", "");

        PendingComment p;
        p.comment.id = *id;
        p.comment.pr_id = pr.id;
        p.comment.file_path = *path;
        p.comment.revision_index = rev->second;
        p.comment.line_start = start;
        p.comment.line_end = *line;
        p.comment.body = *body;
        p.comment.author = pseudonymize(login, options.pseudonym_salt);
        p.comment.created_at = *ts;
        if (auto topic = string_field(jc, "topic")) p.comment.topic_override = *topic;
        p.thread_key = id_text(jc, "in_reply_to_id").value_or(*id);
        p.comment.thread_id = "t" + p.thread_key;
        pending.push_back(std::move(p));
    }

    // Reply chains: each comment replies to its predecessor in the thread.
    std::map<std::string, std::vector<std::size_t>> threads;
    for (std::size_t i = 0; i < pending.size(); ++i) threads[pending[i].thread_key].push_back(i);
    std::vector<bool> keep(pending.size(), true);
    for (auto& [key, members] : threads) {
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            const auto& ca = pending[a].comment;
            const auto& cb = pending[b].comment;
            return std::tie(ca.created_at, ca.id) < std::tie(cb.created_at, cb.id);
        });
        const ReviewComment* prev = nullptr;
        for (std::size_t idx : members) {
            auto& c = pending[idx].comment;
            if (prev && !(prev->created_at < c.created_at)) {
                skipped.push_back({pr.id + " comment " + c.id, "same timestamp as its predecessor in thread"});
                log::warn("skipping {} comment {}: same timestamp as its predecessor in thread", pr.id, c.id);
                keep[idx] = false;
                continue;
            }
            if (prev) c.reply_to = prev->id;
            prev = &c;
        }
    }
    for (std::size_t i = 0; i < pending.size(); ++i) {
        if (keep[i]) pr.comments.push_back(std::move(pending[i].comment));
    }
    std::stable_sort(pr.comments.begin(), pr.comments.end(), [](const auto& a, const auto& b) {
        return std::tie(a.created_at, a.id) < std::tie(b.created_at, b.id);
    });
    return pr;
}

}  // namespace

NormalizeResult normalize_export(const json& documents, const NormalizeOptions& options) {
    NormalizeResult result;
    if (!documents.is_array()) throw SchemaError("export", "<root>", "expected an array of documents");
    std::unordered_set<std::string> pr_ids;
    std::unordered_set<std::string> comment_ids;
    for (std::size_t i = 0; i < documents.size(); ++i) {
        const std::string label = "document #" + std::to_string(i + 1);
        try {
            std::vector<UnmappableRecord> comment_skips;
            PullRequest pr = map_pull_request(documents[i], options, comment_skips);
            if (!pr_ids.insert(pr.id).second) throw Skip{"duplicate pull request " + pr.id};
            std::vector<ReviewComment> unique;
            for (auto& c : pr.comments) {
                if (comment_ids.insert(c.id).second) {
                    unique.push_back(std::move(c));
                } else {
                    comment_skips.push_back({pr.id + " comment " + c.id, "duplicate comment id"});
                    log::warn("skipping {} comment {}: duplicate comment id", pr.id, c.id);
                }
            }
            pr.comments = std::move(unique);
            validate_pull_request(pr, label);
            result.skipped.insert(result.skipped.end(), comment_skips.begin(), comment_skips.end());
            result.corpus.pull_requests.push_back(std::move(pr));
        } catch (const Skip& s) {
            result.skipped.push_back({label, s.reason});
            log::warn("skipping {}: {}", label, s.reason);
        } catch (const SchemaError& e) {
            result.skipped.push_back({label, e.what()});
            log::warn("skipping {}: {}", label, e.what());
        }
    }
    return result;
}

json to_export(const ReviewCorpus& corpus) {
    json docs = json::array();
    for (const auto& pr : corpus.pull_requests) {
        auto hash = pr.id.rfind('#');
        if (hash == std::string::npos || pr.id.substr(0, hash) != pr.repo) {
            throw SchemaError("pull request '" + pr.id + "'", "id", "not of the form <repo>#<number>");
        }
        json files = json::array();
        for (const auto& path : pr.file_paths()) {
            json revisions = json::array();
            for (const auto* r : pr.file_revisions(path)) {
                revisions.push_back({{"commit_id", "r" + std::to_string(r->revision_index)},
                                     {"content", r->content}});
            }
            files.push_back({{"path", path}, {"revisions", std::move(revisions)}});
        }
        // Thread root = earliest comment of the thread.
        std::map<std::string, const ReviewComment*> roots;
        for (const auto& c : pr.comments) {
            auto& root = roots[c.thread_id];
            if (!root || std::tie(c.created_at, c.id) < std::tie(root->created_at, root->id)) root = &c;
        }
        json comments = json::array();
        for (const auto& c : pr.comments) {
            const ReviewComment* root = roots[c.thread_id];
            json jc = {{"id", c.id},
                       {"path", c.file_path},
                       {"commit_id", "r" + std::to_string(c.revision_index)},
                       {"start_line", c.line_start},
                       {"line", c.line_end},
                       {"body", c.body},
                       {"user", {{"login", c.author}}},
                       {"created_at", format_rfc3339(c.created_at)},
                       {"in_reply_to_id", root == &c ? json(nullptr) : json(root->id)}};
            if (c.topic_override) jc["topic"] = *c.topic_override;
            comments.push_back(std::move(jc));
        }
        docs.push_back({{"repo", pr.repo},
                        {"number", pr.id.substr(hash + 1)},
                        {"created_at", format_rfc3339(pr.created_at)},
                        {"merged", pr.merged},
                        {"files", std::move(files)},
                        {"review_comments", std::move(comments)}});
    }
    return docs;
}

json read_export_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open export file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return json::array();
    if (text[first] == '[') {
        json j = json::parse(text, nullptr, false);
        if (j.is_discarded()) throw SchemaError(path.string(), "<root>", "invalid JSON");
        return j;
    }
    json docs = json::array();
    std::istringstream lines(text);
    std::string line;
    std::size_t no = 0;
    while (std::getline(lines, line)) {
        ++no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw SchemaError(path.string() + " line " + std::to_string(no), "<record>", "invalid JSON");
        docs.push_back(std::move(j));
    }
    return docs;
}

}  // namespace mcrg
