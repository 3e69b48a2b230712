#include "mcrg/corpus.hpp"

#include "mcrg/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace mcrg {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Lookup helpers

std::vector<const FileRevision*> PullRequest::file_revisions(const std::string& file_path) const {
    std::vector<const FileRevision*> out;
    for (const auto& r : revisions) {
        if (r.file_path == file_path) out.push_back(&r);
    }
    std::sort(out.begin(), out.end(), [](const FileRevision* a, const FileRevision* b) {
        return a->revision_index < b->revision_index;
    });
    return out;
}

const FileRevision* PullRequest::find_revision(const std::string& file_path, int revision_index) const {
    for (const auto& r : revisions) {
        if (r.file_path == file_path && r.revision_index == revision_index) return &r;
    }
    return nullptr;
}

int PullRequest::last_revision_index(const std::string& file_path) const {
    int last = -1;
    for (const auto& r : revisions) {
        if (r.file_path == file_path) last = std::max(last, r.revision_index);
    }
    return last;
}

std::vector<std::string> PullRequest::file_paths() const {
    std::vector<std::string> out;
    for (const auto& r : revisions) {
        if (std::find(out.begin(), out.end(), r.file_path) == out.end()) out.push_back(r.file_path);
    }
    std::sort(out.begin(), out.end());
    return out;
}

const PullRequest* ReviewCorpus::find(const std::string& pr_id) const {
    for (const auto& pr : pull_requests) {
        if (pr.id == pr_id) return &pr;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// JSON mapping

namespace {

const char* origin_name(LineOrigin o) {
    switch (o) {
        case LineOrigin::context: return "CONTEXT";
        case LineOrigin::added: return "ADDED";
        case LineOrigin::removed: return "REMOVED";
    }
    return "CONTEXT";
}

const json& require(const json& j, const char* field, const std::string& record) {
    auto it = j.find(field);
    if (it == j.end()) throw SchemaError(record, field, "missing");
    return *it;
}

std::string get_string(const json& j, const char* field, const std::string& record) {
    const json& v = require(j, field, record);
    if (!v.is_string()) throw SchemaError(record, field, "expected a string");
    return v.get<std::string>();
}

int get_int(const json& j, const char* field, const std::string& record) {
    const json& v = require(j, field, record);
    if (!v.is_number_integer()) throw SchemaError(record, field, "expected an integer");
    auto value = v.get<long long>();
    if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
        throw SchemaError(record, field, "integer out of range");
    }
    return static_cast<int>(value);
}

Timestamp get_time(const json& j, const char* field, const std::string& record) {
    auto text = get_string(j, field, record);
    auto ts = parse_rfc3339(text);
    if (!ts) throw SchemaError(record, field, "not an RFC 3339 timestamp: '" + text + "'");
    return *ts;
}

ChangeHunk hunk_from_json(const json& j, const std::string& record) {
    if (!j.is_object()) throw SchemaError(record, "hunks", "expected an object");
    ChangeHunk h;
    h.old_start = get_int(j, "old_start", record);
    h.old_len = get_int(j, "old_len", record);
    h.new_start = get_int(j, "new_start", record);
    h.new_len = get_int(j, "new_len", record);
    const json& lines = require(j, "lines", record);
    if (!lines.is_array()) throw SchemaError(record, "lines", "expected an array");
    for (const auto& l : lines) {
        HunkLine line;
        auto origin = get_string(l, "origin", record);
        if (origin == "CONTEXT") {
            line.origin = LineOrigin::context;
        } else if (origin == "ADDED") {
            line.origin = LineOrigin::added;
        } else if (origin == "REMOVED") {
            line.origin = LineOrigin::removed;
        } else {
            throw SchemaError(record, "origin", "unknown line origin '" + origin + "'");
        }
        line.text = get_string(l, "text", record);
        if (auto it = l.find("no_newline"); it != l.end()) {
            if (!it->is_boolean()) throw SchemaError(record, "no_newline", "expected a boolean");
            line.no_newline = it->get<bool>();
        }
        h.lines.push_back(std::move(line));
    }
    return h;
}

}  // namespace

json to_json(const ChangeHunk& h) {
    json lines = json::array();
    for (const auto& l : h.lines) {
        json jl = {{"origin", origin_name(l.origin)}, {"text", l.text}};
        if (l.no_newline) jl["no_newline"] = true;
        lines.push_back(std::move(jl));
    }
    return json{{"old_start", h.old_start}, {"old_len", h.old_len}, {"new_start", h.new_start},
                {"new_len", h.new_len},     {"lines", std::move(lines)}};
}

json to_json(const PullRequest& pr) {
    json revisions = json::array();
    for (const auto& r : pr.revisions) {
        json hunks = json::array();
        for (const auto& h : r.hunks) hunks.push_back(to_json(h));
        revisions.push_back({{"pr_id", r.pr_id},
                             {"file_path", r.file_path},
                             {"revision_index", r.revision_index},
                             {"content", r.content},
                             {"hunks", std::move(hunks)}});
    }
    json comments = json::array();
    for (const auto& c : pr.comments) {
        json jc = {{"id", c.id},
                   {"pr_id", c.pr_id},
                   {"file_path", c.file_path},
                   {"revision_index", c.revision_index},
                   {"line_start", c.line_start},
                   {"line_end", c.line_end},
                   {"body", c.body},
                   {"author", c.author},
                   {"created_at", format_rfc3339(c.created_at)},
                   {"thread_id", c.thread_id},
                   {"reply_to", c.reply_to ? json(*c.reply_to) : json(nullptr)}};
        if (c.topic_override) jc["topic_override"] = *c.topic_override;
        comments.push_back(std::move(jc));
    }
    return json{{"id", pr.id},
                {"repo", pr.repo},
                {"created_at", format_rfc3339(pr.created_at)},
                {"merged", pr.merged},
                {"revisions", std::move(revisions)},
                {"comments", std::move(comments)}};
}

PullRequest pull_request_from_json(const json& j, const std::string& record) {
    if (!j.is_object()) throw SchemaError(record, "<record>", "expected a JSON object");
    PullRequest pr;
    pr.id = get_string(j, "id", record);
    const std::string rec = record + " (pr '" + pr.id + "')";
    pr.repo = get_string(j, "repo", rec);
    pr.created_at = get_time(j, "created_at", rec);
    const json& merged = require(j, "merged", rec);
    if (!merged.is_boolean()) throw SchemaError(rec, "merged", "expected a boolean");
    pr.merged = merged.get<bool>();

    const json& revisions = require(j, "revisions", rec);
    if (!revisions.is_array()) throw SchemaError(rec, "revisions", "expected an array");
    for (const auto& jr : revisions) {
        FileRevision r;
        r.pr_id = get_string(jr, "pr_id", rec);
        r.file_path = get_string(jr, "file_path", rec);
        r.revision_index = get_int(jr, "revision_index", rec);
        r.content = get_string(jr, "content", rec);
        const json& hunks = require(jr, "hunks", rec);
        if (!hunks.is_array()) throw SchemaError(rec, "hunks", "expected an array");
        for (const auto& jh : hunks) r.hunks.push_back(hunk_from_json(jh, rec));
        pr.revisions.push_back(std::move(r));
    }

    const json& comments = require(j, "comments", rec);
    if (!comments.is_array()) throw SchemaError(rec, "comments", "expected an array");
    for (const auto& jc : comments) {
        ReviewComment c;
        c.id = get_string(jc, "id", rec);
        const std::string crec = rec + " comment '" + c.id + "'";
        c.pr_id = get_string(jc, "pr_id", crec);
        c.file_path = get_string(jc, "file_path", crec);
        c.revision_index = get_int(jc, "revision_index", crec);
        c.line_start = get_int(jc, "line_start", crec);
        c.line_end = get_int(jc, "line_end", crec);
        c.body = get_string(jc, "body", crec);
        c.author = get_string(jc, "author", crec);
        c.created_at = get_time(jc, "created_at", crec);
        c.thread_id = get_string(jc, "thread_id", crec);
        if (auto it = jc.find("reply_to"); it != jc.end() && !it->is_null()) {
            if (!it->is_string()) throw SchemaError(crec, "reply_to", "expected a string or null");
            c.reply_to = it->get<std::string>();
        }
        if (auto it = jc.find("topic_override"); it != jc.end() && !it->is_null()) {
            if (!it->is_string()) throw SchemaError(crec, "topic_override", "expected a string or null");
            c.topic_override = it->get<std::string>();
        }
        pr.comments.push_back(std::move(c));
    }
    return pr;
}

// ---------------------------------------------------------------------------
// Validation

void validate_pull_request(const PullRequest& pr, const std::string& record) {
    const std::string rec = record + " (pr '" + pr.id + "')";
    if (pr.id.empty()) throw SchemaError(rec, "id", "empty");

    std::map<std::string, int> next_index;
    std::map<std::string, const FileRevision*> previous;
    for (const auto& r : pr.revisions) {
        const std::string rrec = fmt::format("{} revision '{}'#{}", rec, r.file_path, r.revision_index);
        if (r.pr_id != pr.id) throw SchemaError(rrec, "pr_id", "does not match enclosing pull request");
        if (r.file_path.empty()) throw SchemaError(rrec, "file_path", "empty");
        int& expected = next_index[r.file_path];
        if (r.revision_index != expected) {
            throw SchemaError(rrec, "revision_index",
                              fmt::format("expected {} (indices are 0-based, increasing, gap-free)", expected));
        }
        ++expected;
        if (r.revision_index == 0) {
            if (!r.hunks.empty()) throw SchemaError(rrec, "hunks", "revision 0 must not carry hunks");
        } else {
            for (std::size_t hi = 0; hi < r.hunks.size(); ++hi) {
                if (!hunk_counts_consistent(r.hunks[hi])) {
                    throw SchemaError(rrec, "hunks", fmt::format("hunk {} line counts disagree with header", hi));
                }
            }
            std::string rebuilt;
            try {
                rebuilt = apply_hunks(previous.at(r.file_path)->content, r.hunks);
            } catch (const HunkMismatch& e) {
                throw SchemaError(rrec, "hunks", e.what());
            }
            if (rebuilt != r.content) {
                throw SchemaError(rrec, "content", "applying hunks to the previous revision does not reproduce it");
            }
        }
        previous[r.file_path] = &r;
    }

    std::unordered_map<std::string, const ReviewComment*> by_id;
    for (const auto& c : pr.comments) by_id.emplace(c.id, &c);
    for (const auto& c : pr.comments) {
        const std::string crec = rec + " comment '" + c.id + "'";
        if (c.id.empty()) throw SchemaError(crec, "id", "empty");
        if (c.pr_id != pr.id) throw SchemaError(crec, "pr_id", "does not match enclosing pull request");
        if (!pr.find_revision(c.file_path, c.revision_index)) {
            throw SchemaError(crec, "revision_index",
                              fmt::format("no revision {} of '{}'", c.revision_index, c.file_path));
        }
        if (c.line_start < 1) throw SchemaError(crec, "line_start", "must be >= 1");
        if (c.line_start > c.line_end) throw SchemaError(crec, "line_start", "line_start > line_end");
        if (c.thread_id.empty()) throw SchemaError(crec, "thread_id", "empty");
        if (c.reply_to) {
            auto it = by_id.find(*c.reply_to);
            if (it == by_id.end()) throw SchemaError(crec, "reply_to", "unknown comment '" + *c.reply_to + "'");
            if (it->second->thread_id != c.thread_id) {
                throw SchemaError(crec, "reply_to", "referenced comment is in another thread");
            }
            if (!(it->second->created_at < c.created_at)) {
                throw SchemaError(crec, "reply_to", "referenced comment is not earlier");
            }
        }
        if (c.topic_override) {
            static const std::set<std::string> kTopics = {"STYLE", "STRUCTURE", "BUG", "USECASE", "OTHER"};
            if (!kTopics.count(*c.topic_override)) {
                throw SchemaError(crec, "topic_override", "unknown meta-topic '" + *c.topic_override + "'");
            }
        }
    }
}

void validate_corpus(const ReviewCorpus& corpus) {
    if (corpus.schema_version != kCorpusSchemaVersion) {
        throw SchemaError("header", "schema_version",
                          fmt::format("unsupported version {}", corpus.schema_version));
    }
    std::unordered_set<std::string> pr_ids;
    std::unordered_set<std::string> comment_ids;
    for (std::size_t i = 0; i < corpus.pull_requests.size(); ++i) {
        const auto& pr = corpus.pull_requests[i];
        const std::string record = fmt::format("pull request #{}", i + 1);
        if (!pr_ids.insert(pr.id).second) throw SchemaError(record, "id", "duplicate pull request id '" + pr.id + "'");
        for (const auto& c : pr.comments) {
            if (!comment_ids.insert(c.id).second) {
                throw SchemaError(record, "comments.id", "duplicate comment id '" + c.id + "'");
            }
        }
        validate_pull_request(pr, record);
    }
}

// ---------------------------------------------------------------------------
// File I/O

ReviewCorpus parse_corpus(std::string_view text) {
    ReviewCorpus corpus;
    bool have_header = false;
    std::unordered_set<std::string> pr_ids;
    std::unordered_set<std::string> comment_ids;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        const std::string record = fmt::format("line {}", line_no);
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw SchemaError(record, "<record>", "invalid JSON");
        if (!have_header) {
            if (!j.is_object() || !j.contains("schema_version")) {
                throw SchemaError(record, "schema_version", "first record must be the schema header");
            }
            const json& v = j["schema_version"];
            if (!v.is_number_integer()) throw SchemaError(record, "schema_version", "expected an integer");
            corpus.schema_version = v.get<int>();
            if (corpus.schema_version != kCorpusSchemaVersion) {
                throw SchemaError(record, "schema_version",
                                  fmt::format("unsupported major version {} (this build reads {})",
                                              corpus.schema_version, kCorpusSchemaVersion));
            }
            have_header = true;
            continue;
        }
        PullRequest pr = pull_request_from_json(j, record);
        if (!pr_ids.insert(pr.id).second) throw SchemaError(record, "id", "duplicate pull request id '" + pr.id + "'");
        for (const auto& c : pr.comments) {
            if (!comment_ids.insert(c.id).second) {
                throw SchemaError(record, "comments.id", "duplicate comment id '" + c.id + "'");
            }
        }
        validate_pull_request(pr, record);
        corpus.pull_requests.push_back(std::move(pr));
    }
    return corpus;
}

ReviewCorpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
    return parse_corpus(buf.str());
}

std::string serialize_corpus(const ReviewCorpus& corpus) {
    std::string out = json{{"schema_version", corpus.schema_version}}.dump() + "\n";
    for (const auto& pr : corpus.pull_requests) out += to_json(pr).dump() + "\n";
    return out;
}

void save_corpus(const ReviewCorpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << serialize_corpus(corpus);
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Derived quantities

std::set<int> changed_lines(const FileRevision& revision) {
    if (revision.revision_index == 0) return {};
    return added_lines(revision.hunks);
}

int stability_horizon(const PullRequest& pr, const std::string& file_path, const std::set<int>& lines,
                      int from_revision) {
    auto revs = pr.file_revisions(file_path);
    if (from_revision < 0 || from_revision >= static_cast<int>(revs.size())) {
        throw UnknownRevision(fmt::format("pull request '{}' has no revision {} of '{}'", pr.id,
                                          from_revision, file_path));
    }
    std::set<int> tracked = lines;
    int horizon = 0;
    for (std::size_t r = static_cast<std::size_t>(from_revision) + 1; r < revs.size(); ++r) {
        const auto& hunks = revs[r]->hunks;
        if (hunks_disturb(hunks, tracked)) break;
        std::set<int> moved;
        for (int l : tracked) {
            if (auto m = map_line_forward(hunks, l)) moved.insert(*m);
        }
        tracked = std::move(moved);
        ++horizon;
    }
    return horizon;
}

CorpusStats corpus_stats(const ReviewCorpus& corpus) {
    CorpusStats s;
    s.n_prs = corpus.pull_requests.size();
    for (const auto& pr : corpus.pull_requests) {
        s.n_comments += pr.comments.size();
        s.n_revisions += pr.revisions.size();
        std::set<std::string> threads;
        for (const auto& c : pr.comments) threads.insert(c.thread_id);
        s.n_threads += threads.size();
        ++s.comments_per_pr_histogram[pr.comments.size()];
    }
    return s;
}

json to_json(const CorpusStats& s) {
    json hist = json::object();
    for (const auto& [k, v] : s.comments_per_pr_histogram) hist[std::to_string(k)] = v;
    return json{{"n_prs", s.n_prs},
                {"n_comments", s.n_comments},
                {"n_revisions", s.n_revisions},
                {"n_threads", s.n_threads},
                {"comments_per_pr_histogram", std::move(hist)}};
}

}  // namespace mcrg
