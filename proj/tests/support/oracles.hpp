#pragma once

// Test-only reference implementations. Nothing here may call into the code
// path it is used to check.

#include "mcrg/ast.hpp"
#include "mcrg/corpus.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// Unified diff text (hunk section only) from a quadratic LCS table.
std::string lcs_unified_diff(const std::string& old_content, const std::string& new_content, int context = 3);

// New-file line numbers not matched by an LCS of old vs new.
std::set<int> lcs_changed_lines(const std::string& old_content, const std::string& new_content);

// GNU `diff -u` output, hunk section only; empty optional when the tool is missing.
std::optional<std::string> gnu_unified_diff(const std::string& old_content, const std::string& new_content);

// Linear scan over all nodes. A node covers the range when its span holds
// every non-comment, non-space character on those lines (all of the lines
// when there is none). Smallest line span, then deepest (depth via a walk
// over CHILD edges), then lowest id; root when nothing strictly smaller
// than the root covers.
int exhaustive_cover(const mcrg::AstGraph& graph, const std::string& source, int line_start, int line_end);

// True when applying the hunks in `revisions` (index > from) by explicit
// line tagging ever removes a tracked line or inserts between two adjacent
// tracked lines.
bool brute_force_modified(const mcrg::PullRequest& pr, const std::string& file_path, const std::set<int>& lines,
                          int from_revision);

// Random MiniJ source. `max_depth` bounds statement nesting.
struct GenOptions {
    int classes = 1;
    int methods = 3;
    int statements = 4;
    int max_depth = 2;
};
std::string random_minij(std::mt19937_64& rng, const GenOptions& options = {});

// Random line-oriented text for diff tests.
std::string random_text(std::mt19937_64& rng, int lines, bool final_newline);
std::string mutate_text(std::mt19937_64& rng, const std::string& text, bool final_newline);

// Lexemes that must appear as AST leaves, in source order. Identifiers that
// name a declaration (class names, types, declared names) have no node.
std::vector<std::string> expected_leaf_tokens(const std::string& source);
// Tokens of the leaves of `g` in id order.
std::vector<std::string> leaf_tokens(const mcrg::AstGraph& g);
// Tree invariants restated from the edge list: one root with id 0, pre-order
// ids, one parent per node, child spans inside parent spans.
std::vector<std::string> tree_violations(const mcrg::AstGraph& g);

// Fraction of (positive, negative) pairs ranked correctly, ties 0.5. Empty
// optional when either class is missing.
std::optional<double> pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels);

std::string read_file(const std::filesystem::path& path);
std::filesystem::path fixture_dir();

}  // namespace oracle
