#pragma once

#include <json.hpp>

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mcrg {

enum class NodeKind {
    compilation_unit,
    class_decl,
    field_decl,
    method_decl,
    param,
    block,
    if_stmt,
    while_stmt,
    for_stmt,
    return_stmt,
    var_decl,
    expr_stmt,
    assign,
    binary,
    unary,
    call,
    field_access,
    index,
    identifier,
    literal,
};

inline constexpr std::size_t kNodeKindCount = 20;

// Upper-case wire names ("COMPILATION_UNIT", "RETURN", ...).
std::string_view node_kind_name(NodeKind kind);
std::optional<NodeKind> node_kind_from_name(std::string_view name);
bool kind_has_token(NodeKind kind);

// 1-based, inclusive on both ends.
struct Span {
    int line_start = 1;
    int col_start = 1;
    int line_end = 1;
    int col_end = 1;

    bool contains(const Span& other) const;
    int line_count() const { return line_end - line_start + 1; }
    bool operator==(const Span&) const = default;
};

struct AstNode {
    int id = 0;
    NodeKind kind = NodeKind::compilation_unit;
    std::optional<std::string> token;
    Span span;
};

enum class EdgeKind { child, next_sibling };

struct AstEdge {
    int src = 0;
    int dst = 0;
    EdgeKind kind = EdgeKind::child;

    auto operator<=>(const AstEdge&) const = default;
};

struct AstGraph {
    std::string file_path;
    int revision_index = 0;
    int line_count = 0;  // lines in the parsed source
    // Per source line: {first col, last col} of its tokens, {0, 0} when the
    // line holds none. Index 0 is line 1.
    std::vector<std::array<int, 2>> line_extents;
    std::vector<AstNode> nodes;
    std::vector<AstEdge> edges;

    // Derived from CHILD edges by rebuild_index().
    std::vector<int> parent;  // -1 for the root
    std::vector<int> depth;
    std::vector<std::vector<int>> children;

    void rebuild_index();
    std::size_t size() const { return nodes.size(); }
};

// ---------------------------------------------------------------------------
// Lexing

enum class TokenKind { identifier, keyword, int_literal, float_literal, string_literal, char_literal, punct, eof };

struct Token {
    TokenKind kind = TokenKind::eof;
    std::string text;
    int line = 1;
    int col = 1;
    int end_line = 1;
    int end_col = 1;  // inclusive
};

// Skips whitespace and comments. Throws SyntaxError on bad characters,
// unterminated literals or comments. The last token is always eof.
std::vector<Token> lex_minij(std::string_view content);

struct LexError {
    int line = 1;
    int col = 1;
    std::string expected;
    std::string found;
};

// Tokens up to the first lexical error. The eof token then sits at the
// error position and `error` is set.
struct LexResult {
    std::vector<Token> tokens;
    std::optional<LexError> error;
};
LexResult lex_minij_prefix(std::string_view content);

// ---------------------------------------------------------------------------
// Graph construction and queries

// Parses MiniJ (docs/grammar.md) into a pre-order numbered AST graph.
// Throws SyntaxError at the first error; there is no recovery.
AstGraph parse_source(std::string_view content, std::string file_path = {}, int revision_index = 0);

// A node covers a line range when its span contains every token on those
// lines (or, for a range without tokens, all of its lines). Returns the
// covering node with the smallest line span; ties prefer the deepest node,
// then the lowest id. The root wins when no node has a strictly smaller
// line span than the root. line_end is clamped to the file. Throws
// OutOfRange.
int node_span_cover(const AstGraph& graph, int line_start, int line_end);

struct AdjEntry {
    int row = 0;
    int col = 0;
    double weight = 1.0;

    auto operator<=>(const AdjEntry&) const = default;
};

// Sorted, deduplicated (row, col, 1) entries.
std::vector<AdjEntry> to_adjacency(const AstGraph& graph, const std::set<EdgeKind>& edge_kinds, bool symmetric,
                                   bool self_loops);

// Structural invariant violations (empty when the graph is well formed).
std::vector<std::string> check_graph_invariants(const AstGraph& graph);

nlohmann::json to_json(const AstGraph& graph);
AstGraph graph_from_json(const nlohmann::json& j);

}  // namespace mcrg
