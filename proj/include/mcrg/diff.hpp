#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcrg {

enum class LineOrigin { context, added, removed };

struct HunkLine {
    LineOrigin origin = LineOrigin::context;
    std::string text;
    // Set when the diff carried "\ No newline at end of file" after this line.
    bool no_newline = false;

    bool operator==(const HunkLine&) const = default;
};

// One "@@ -old_start,old_len +new_start,new_len @@" block. Counters are
// 1-based; a zero length means the start names the line *before* the hunk,
// as in GNU diff output.
struct ChangeHunk {
    int old_start = 0;
    int old_len = 0;
    int new_start = 0;
    int new_len = 0;
    std::vector<HunkLine> lines;

    bool operator==(const ChangeHunk&) const = default;
};

// Content split on '\n'. A trailing '\n' terminates the last line rather
// than starting an empty one.
struct TextLines {
    std::vector<std::string> lines;
    bool final_newline = false;
};

TextLines split_lines(std::string_view content);
std::string join_lines(const TextLines& text);
int line_count(std::string_view content);

// Throws MalformedDiff on bad headers, stray lines, or count mismatches.
std::vector<ChangeHunk> parse_unified_diff(std::string_view text);

// Hunk section only (no ---/+++ file headers); counts always explicit.
std::string format_unified_diff(std::span<const ChangeHunk> hunks);

// Throws HunkMismatch when a context or removed line disagrees with
// old_content, or when hunks overlap or are out of order.
std::string apply_hunks(std::string_view old_content, std::span<const ChangeHunk> hunks);

// Line diff (Myers) grouped into hunks with `context` lines of context.
std::vector<ChangeHunk> compute_hunks(std::string_view old_content, std::string_view new_content,
                                      int context = 3);

// Checks count(CONTEXT)+count(ADDED) == new_len and the old-side analogue.
bool hunk_counts_consistent(const ChangeHunk& hunk);

// New-file line numbers of ADDED lines.
std::set<int> added_lines(std::span<const ChangeHunk> hunks);

// Old line -> new line, nullopt when the line is removed.
std::optional<int> map_line_forward(std::span<const ChangeHunk> hunks, int old_line);
// New line -> old line, nullopt when the line was added.
std::optional<int> map_line_backward(std::span<const ChangeHunk> hunks, int new_line);

// True when the hunks edit the tracked old-file lines: one of them is
// REMOVED, or new lines are inserted between two consecutive tracked lines.
bool hunks_disturb(std::span<const ChangeHunk> hunks, const std::set<int>& old_lines);

}  // namespace mcrg
