#include "mcrg/diff.hpp"

#include "mcrg/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>

namespace mcrg {

TextLines split_lines(std::string_view content) {
    TextLines out;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t nl = content.find('\n', pos);
        if (nl == std::string_view::npos) {
            out.lines.emplace_back(content.substr(pos));
            out.final_newline = false;
            return out;
        }
        out.lines.emplace_back(content.substr(pos, nl - pos));
        pos = nl + 1;
    }
    out.final_newline = !content.empty();
    return out;
}

std::string join_lines(const TextLines& text) {
    std::string out;
    for (std::size_t i = 0; i < text.lines.size(); ++i) {
        if (i > 0) out += '\n';
        out += text.lines[i];
    }
    if (text.final_newline && !text.lines.empty()) out += '\n';
    return out;
}

int line_count(std::string_view content) {
    return static_cast<int>(split_lines(content).lines.size());
}

bool hunk_counts_consistent(const ChangeHunk& hunk) {
    int old_n = 0, new_n = 0;
    for (const auto& l : hunk.lines) {
        if (l.origin != LineOrigin::added) ++old_n;
        if (l.origin != LineOrigin::removed) ++new_n;
    }
    return old_n == hunk.old_len && new_n == hunk.new_len;
}

namespace {

bool parse_uint(std::string_view s, std::size_t& pos, int& out) {
    std::size_t start = pos;
    long long v = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        v = v * 10 + (s[pos] - '0');
        if (v > 1'000'000'000) return false;
        ++pos;
    }
    out = static_cast<int>(v);
    return pos > start;
}

// "@@ -a[,b] +c[,d] @@[ section]"
bool parse_header(std::string_view line, ChangeHunk& h) {
    std::size_t pos = 0;
    if (line.substr(0, 4) != "@@ -") return false;
    pos = 4;
    if (!parse_uint(line, pos, h.old_start)) return false;
    h.old_len = 1;
    if (pos < line.size() && line[pos] == ',') {
        ++pos;
        if (!parse_uint(line, pos, h.old_len)) return false;
    }
    if (line.substr(pos, 2) != " +") return false;
    pos += 2;
    if (!parse_uint(line, pos, h.new_start)) return false;
    h.new_len = 1;
    if (pos < line.size() && line[pos] == ',') {
        ++pos;
        if (!parse_uint(line, pos, h.new_len)) return false;
    }
    if (line.substr(pos, 3) != " @@") return false;
    return true;
}

bool is_file_header(std::string_view line) {
    static constexpr std::string_view kPrefixes[] = {"diff ",     "index ",        "--- ",
                                                     "+++ ",      "new file mode", "deleted file mode",
                                                     "old mode ", "new mode "};
    return std::any_of(std::begin(kPrefixes), std::end(kPrefixes),
                       [&](std::string_view p) { return line.substr(0, p.size()) == p; });
}

}  // namespace

std::vector<ChangeHunk> parse_unified_diff(std::string_view text) {
    std::vector<std::string_view> lines;
    {
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t nl = text.find('\n', pos);
            if (nl == std::string_view::npos) nl = text.size();
            std::string_view l = text.substr(pos, nl - pos);
            if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
            lines.push_back(l);
            pos = nl + 1;
        }
    }

    std::vector<ChangeHunk> hunks;
    std::size_t i = 0;
    bool seen_hunk = false;
    while (i < lines.size()) {
        std::string_view line = lines[i];
        const std::size_t line_no = i + 1;
        if (line.substr(0, 2) != "@@") {
            if (!seen_hunk && is_file_header(line)) {
                ++i;
                continue;
            }
            if (line.empty() && i + 1 == lines.size()) break;
            throw MalformedDiff(line_no, seen_hunk ? "line outside any hunk (count mismatch?)"
                                                   : "expected hunk header");
        }
        ChangeHunk h;
        if (!parse_header(line, h)) throw MalformedDiff(line_no, "bad hunk header");
        if ((h.old_len > 0 && h.old_start == 0) || (h.new_len > 0 && h.new_start == 0)) {
            throw MalformedDiff(line_no, "zero start with non-zero length");
        }
        seen_hunk = true;
        ++i;
        int old_left = h.old_len, new_left = h.new_len;
        while (old_left > 0 || new_left > 0) {
            if (i >= lines.size()) {
                throw MalformedDiff(line_no, fmt::format("hunk ends early: {} old and {} new lines missing",
                                                         old_left, new_left));
            }
            std::string_view l = lines[i];
            LineOrigin origin;
            std::string_view body;
            if (l.empty()) {
                origin = LineOrigin::context;  // some tools strip the lone space
            } else if (l[0] == ' ') {
                origin = LineOrigin::context;
                body = l.substr(1);
            } else if (l[0] == '+') {
                origin = LineOrigin::added;
                body = l.substr(1);
            } else if (l[0] == '-') {
                origin = LineOrigin::removed;
                body = l.substr(1);
            } else if (l[0] == '\\') {
                if (h.lines.empty()) throw MalformedDiff(i + 1, "no-newline marker before any line");
                h.lines.back().no_newline = true;
                ++i;
                continue;
            } else {
                throw MalformedDiff(i + 1, "unexpected line inside hunk");
            }
            if (origin != LineOrigin::added && old_left-- <= 0) {
                throw MalformedDiff(i + 1, "more old-side lines than the header declares");
            }
            if (origin != LineOrigin::removed && new_left-- <= 0) {
                throw MalformedDiff(i + 1, "more new-side lines than the header declares");
            }
            h.lines.push_back(HunkLine{origin, std::string(body), false});
            ++i;
        }
        if (i < lines.size() && !lines[i].empty() && lines[i][0] == '\\') {
            if (h.lines.empty()) throw MalformedDiff(i + 1, "no-newline marker before any line");
            h.lines.back().no_newline = true;
            ++i;
        }
        hunks.push_back(std::move(h));
    }
    return hunks;
}

std::string format_unified_diff(std::span<const ChangeHunk> hunks) {
    std::string out;
    for (const auto& h : hunks) {
        out += fmt::format("@@ -{},{} +{},{} @@\n", h.old_start, h.old_len, h.new_start, h.new_len);
        for (const auto& l : h.lines) {
            out += l.origin == LineOrigin::context ? ' ' : l.origin == LineOrigin::added ? '+' : '-';
            out += l.text;
            out += '\n';
            if (l.no_newline) out += "\\ No newline at end of file\n";
        }
    }
    return out;
}

std::string apply_hunks(std::string_view old_content, std::span<const ChangeHunk> hunks) {
    if (hunks.empty()) return std::string(old_content);
    TextLines old_text = split_lines(old_content);
    const auto& old = old_text.lines;
    TextLines result;
    std::size_t cursor = 0;
    bool last_hunk_reaches_eof = false;
    // Newline state of the last new-side line of the last hunk: 0 none, 1 '\n', 2 missing.
    int eof_state = 0;

    for (std::size_t hi = 0; hi < hunks.size(); ++hi) {
        const ChangeHunk& h = hunks[hi];
        if (!hunk_counts_consistent(h)) throw HunkMismatch(hi, "line counts disagree with header");
        std::size_t start = h.old_len == 0 ? static_cast<std::size_t>(h.old_start)
                                           : static_cast<std::size_t>(h.old_start - 1);
        if (start < cursor || start > old.size()) {
            throw HunkMismatch(hi, "hunk out of order or beyond end of file");
        }
        for (; cursor < start; ++cursor) result.lines.push_back(old[cursor]);
        std::size_t expected_new_start = h.new_len == 0 ? result.lines.size() : result.lines.size() + 1;
        if (static_cast<std::size_t>(h.new_start) != expected_new_start) {
            throw HunkMismatch(hi, fmt::format("new_start {} but {} expected", h.new_start,
                                               expected_new_start));
        }
        int last_new_side = 0;
        for (const auto& l : h.lines) {
            if (l.origin != LineOrigin::added) {
                if (cursor >= old.size() || old[cursor] != l.text) {
                    throw HunkMismatch(hi, fmt::format("old line {} differs", cursor + 1));
                }
                ++cursor;
            }
            if (l.origin != LineOrigin::removed) {
                result.lines.push_back(l.text);
                last_new_side = l.no_newline ? 2 : 1;
            }
        }
        last_hunk_reaches_eof = cursor == old.size();
        eof_state = last_new_side;
    }
    for (; cursor < old.size(); ++cursor) result.lines.push_back(old[cursor]);

    if (!last_hunk_reaches_eof) {
        result.final_newline = old_text.final_newline;
    } else if (eof_state != 0) {
        result.final_newline = eof_state == 1;
    } else {
        // Trailing deletion: the surviving last line was an interior old line.
        result.final_newline = true;
    }
    return join_lines(result);
}

namespace {

enum class EditKind { equal, remove, insert };
struct Edit {
    EditKind kind;
    int old_idx;  // 0-based, valid for equal/remove
    int new_idx;  // 0-based, valid for equal/insert
};

std::vector<Edit> myers_diff(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    const int max = n + m;
    const int offset = max + 1;
    std::vector<int> v(2 * max + 3, 0);
    std::vector<std::vector<int>> trace;
    int final_d = 0;
    bool done = false;
    for (int d = 0; d <= max && !done; ++d) {
        trace.push_back(v);
        for (int k = -d; k <= d; k += 2) {
            int x;
            if (k == -d || (k != d && v[offset + k - 1] < v[offset + k + 1])) {
                x = v[offset + k + 1];
            } else {
                x = v[offset + k - 1] + 1;
            }
            int y = x - k;
            while (x < n && y < m && a[x] == b[y]) {
                ++x;
                ++y;
            }
            v[offset + k] = x;
            if (x >= n && y >= m) {
                final_d = d;
                done = true;
                break;
            }
        }
    }

    std::vector<Edit> edits;
    int x = n, y = m;
    for (int d = final_d; d >= 0; --d) {
        const auto& vd = trace[d];
        int k = x - y;
        int prev_k;
        if (k == -d || (k != d && vd[offset + k - 1] < vd[offset + k + 1])) {
            prev_k = k + 1;
        } else {
            prev_k = k - 1;
        }
        int prev_x = vd[offset + prev_k];
        int prev_y = prev_x - prev_k;
        while (x > prev_x && y > prev_y) {
            edits.push_back({EditKind::equal, x - 1, y - 1});
            --x;
            --y;
        }
        if (d > 0) {
            if (x == prev_x) {
                edits.push_back({EditKind::insert, -1, y - 1});
            } else {
                edits.push_back({EditKind::remove, x - 1, -1});
            }
        }
        x = prev_x;
        y = prev_y;
    }
    std::reverse(edits.begin(), edits.end());
    return edits;
}

}  // namespace

std::vector<ChangeHunk> compute_hunks(std::string_view old_content, std::string_view new_content,
                                      int context) {
    TextLines old_text = split_lines(old_content);
    TextLines new_text = split_lines(new_content);

    // A last line without '\n' never equals one with it.
    auto keyed = [](const TextLines& t) {
        std::vector<std::string> keys = t.lines;
        if (!keys.empty() && !t.final_newline) keys.back() += std::string("\0eof", 4);
        return keys;
    };
    std::vector<Edit> edits = myers_diff(keyed(old_text), keyed(new_text));

    const int old_last = static_cast<int>(old_text.lines.size()) - 1;
    const int new_last = static_cast<int>(new_text.lines.size()) - 1;
    auto make_line = [&](const Edit& e) {
        HunkLine l;
        switch (e.kind) {
            case EditKind::equal:
                l.origin = LineOrigin::context;
                l.text = new_text.lines[e.new_idx];
                l.no_newline = e.new_idx == new_last && !new_text.final_newline;
                break;
            case EditKind::remove:
                l.origin = LineOrigin::removed;
                l.text = old_text.lines[e.old_idx];
                l.no_newline = e.old_idx == old_last && !old_text.final_newline;
                break;
            case EditKind::insert:
                l.origin = LineOrigin::added;
                l.text = new_text.lines[e.new_idx];
                l.no_newline = e.new_idx == new_last && !new_text.final_newline;
                break;
        }
        return l;
    };

    std::vector<std::size_t> changes;
    for (std::size_t i = 0; i < edits.size(); ++i) {
        if (edits[i].kind != EditKind::equal) changes.push_back(i);
    }
    std::vector<ChangeHunk> hunks;
    const std::size_t ctx = static_cast<std::size_t>(std::max(context, 0));
    std::size_t ci = 0;
    while (ci < changes.size()) {
        std::size_t first = changes[ci];
        std::size_t last = first;
        while (ci + 1 < changes.size() && changes[ci + 1] - last - 1 <= 2 * ctx) {
            last = changes[++ci];
        }
        ++ci;
        std::size_t begin = first >= ctx ? first - ctx : 0;
        std::size_t end = std::min(edits.size(), last + ctx + 1);

        int old_before = 0, new_before = 0;
        for (std::size_t i = 0; i < begin; ++i) {
            if (edits[i].kind != EditKind::insert) ++old_before;
            if (edits[i].kind != EditKind::remove) ++new_before;
        }
        ChangeHunk h;
        for (std::size_t i = begin; i < end; ++i) {
            h.lines.push_back(make_line(edits[i]));
            if (edits[i].kind != EditKind::insert) ++h.old_len;
            if (edits[i].kind != EditKind::remove) ++h.new_len;
        }
        h.old_start = h.old_len == 0 ? old_before : old_before + 1;
        h.new_start = h.new_len == 0 ? new_before : new_before + 1;
        hunks.push_back(std::move(h));
    }
    return hunks;
}

std::set<int> added_lines(std::span<const ChangeHunk> hunks) {
    std::set<int> out;
    for (const auto& h : hunks) {
        int n = h.new_len == 0 ? h.new_start + 1 : h.new_start;
        for (const auto& l : h.lines) {
            if (l.origin == LineOrigin::added) out.insert(n);
            if (l.origin != LineOrigin::removed) ++n;
        }
    }
    return out;
}

namespace {

// Walks the hunks as a line correspondence. `from_old` selects the direction.
std::optional<int> map_line(std::span<const ChangeHunk> hunks, int line, bool from_old) {
    int delta = 0;  // target - source for lines before the current hunk
    for (const auto& h : hunks) {
        int src_start = from_old ? h.old_start : h.new_start;
        int src_len = from_old ? h.old_len : h.new_len;
        int first_src = src_len == 0 ? src_start + 1 : src_start;
        if (line < first_src) return line + delta;
        int src = first_src;
        int dst = from_old ? (h.new_len == 0 ? h.new_start + 1 : h.new_start)
                           : (h.old_len == 0 ? h.old_start + 1 : h.old_start);
        const LineOrigin src_only = from_old ? LineOrigin::removed : LineOrigin::added;
        const LineOrigin dst_only = from_old ? LineOrigin::added : LineOrigin::removed;
        for (const auto& l : h.lines) {
            if (l.origin == LineOrigin::context) {
                if (src == line) return dst;
                ++src;
                ++dst;
            } else if (l.origin == src_only) {
                if (src == line) return std::nullopt;
                ++src;
            } else if (l.origin == dst_only) {
                ++dst;
            }
        }
        delta = dst - src;
    }
    return line + delta;
}

}  // namespace

std::optional<int> map_line_forward(std::span<const ChangeHunk> hunks, int old_line) {
    return map_line(hunks, old_line, true);
}

std::optional<int> map_line_backward(std::span<const ChangeHunk> hunks, int new_line) {
    return map_line(hunks, new_line, false);
}

bool hunks_disturb(std::span<const ChangeHunk> hunks, const std::set<int>& old_lines) {
    if (old_lines.empty()) return false;
    for (const auto& h : hunks) {
        int o = h.old_len == 0 ? h.old_start + 1 : h.old_start;
        for (const auto& l : h.lines) {
            switch (l.origin) {
                case LineOrigin::context:
                    ++o;
                    break;
                case LineOrigin::removed:
                    if (old_lines.count(o)) return true;
                    ++o;
                    break;
                case LineOrigin::added:
                    // Inserted between old lines o-1 and o.
                    if (old_lines.count(o - 1) && old_lines.count(o)) return true;
                    break;
            }
        }
    }
    return false;
}

}  // namespace mcrg
