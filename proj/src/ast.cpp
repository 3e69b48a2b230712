#include "mcrg/ast.hpp"

#include "mcrg/diff.hpp"
#include "mcrg/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <tuple>

namespace mcrg {

namespace {

constexpr std::array<std::string_view, kNodeKindCount> kKindNames = {
    "COMPILATION_UNIT", "CLASS_DECL", "FIELD_DECL", "METHOD_DECL", "PARAM",      "BLOCK",    "IF",
    "WHILE",            "FOR",        "RETURN",     "VAR_DECL",    "EXPR_STMT",  "ASSIGN",   "BINARY",
    "UNARY",            "CALL",       "FIELD_ACCESS", "INDEX",     "IDENTIFIER", "LITERAL",
};

}  // namespace

std::string_view node_kind_name(NodeKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<NodeKind> node_kind_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) return static_cast<NodeKind>(i);
    }
    return std::nullopt;
}

bool kind_has_token(NodeKind kind) {
    return kind == NodeKind::identifier || kind == NodeKind::literal || kind == NodeKind::binary ||
           kind == NodeKind::unary || kind == NodeKind::assign;
}

bool Span::contains(const Span& o) const {
    return std::tie(line_start, col_start) <= std::tie(o.line_start, o.col_start) &&
           std::tie(o.line_end, o.col_end) <= std::tie(line_end, col_end);
}

void AstGraph::rebuild_index() {
    const std::size_t n = nodes.size();
    parent.assign(n, -1);
    depth.assign(n, 0);
    children.assign(n, {});
    for (const auto& e : edges) {
        if (e.kind != EdgeKind::child) continue;
        if (e.src < 0 || e.dst < 0 || static_cast<std::size_t>(e.src) >= n || static_cast<std::size_t>(e.dst) >= n) {
            throw DimensionMismatch(fmt::format("edge ({}, {}) outside graph of {} nodes", e.src, e.dst, n));
        }
        parent[e.dst] = e.src;
        children[e.src].push_back(e.dst);
    }
    for (auto& c : children) std::sort(c.begin(), c.end());
    // Pre-order ids make parents precede children.
    for (std::size_t i = 0; i < n; ++i) {
        if (parent[i] >= 0) depth[i] = depth[parent[i]] + 1;
    }
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct TmpNode {
    NodeKind kind;
    std::optional<std::string> token;
    Span span;
    std::vector<int> children;
};

// Result of parsing a construct: arena node plus its first token.
struct Parsed {
    int node;
    std::size_t first;
};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    std::vector<TmpNode> run() {
        arena_.push_back(TmpNode{NodeKind::compilation_unit, std::nullopt, {}, {}});
        while (!at_eof()) {
            int cls = class_decl();
            arena_[0].children.push_back(cls);
        }
        return std::move(arena_);
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }
    bool at_eof() const { return peek().kind == TokenKind::eof; }
    bool is_punct(std::string_view p, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::punct && t.text == p;
    }
    bool is_keyword(std::string_view k) const {
        return peek().kind == TokenKind::keyword && peek().text == k;
    }

    [[noreturn]] void fail(const std::string& expected) const {
        const Token& t = peek();
        std::string found = t.kind == TokenKind::eof ? "end of input" : "'" + t.text + "'";
        throw SyntaxError(t.line, t.col, expected, found);
    }

    void expect_punct(std::string_view p) {
        if (!is_punct(p)) fail(fmt::format("'{}'", p));
        ++pos_;
    }
    void expect_keyword(std::string_view k) {
        if (!is_keyword(k)) fail(fmt::format("'{}'", k));
        ++pos_;
    }
    void expect_identifier() {
        if (peek().kind != TokenKind::identifier) fail("identifier");
        ++pos_;
    }

    int make(NodeKind kind, std::size_t first, std::vector<int> children = {},
             std::optional<std::string> token = std::nullopt) {
        const Token& a = toks_[first];
        const Token& b = toks_[pos_ - 1];
        arena_.push_back(TmpNode{kind, std::move(token), Span{a.line, a.col, b.end_line, b.end_col},
                                 std::move(children)});
        return static_cast<int>(arena_.size() - 1);
    }

    int class_decl() {
        std::size_t first = pos_;
        expect_keyword("class");
        expect_identifier();
        expect_punct("{");
        std::vector<int> members;
        while (!is_punct("}")) {
            if (at_eof()) fail("'}'");
            members.push_back(member());
        }
        expect_punct("}");
        return make(NodeKind::class_decl, first, std::move(members));
    }

    void type() {
        if (peek().kind != TokenKind::identifier) fail("type");
        ++pos_;
        while (is_punct("[")) {
            ++pos_;
            expect_punct("]");
        }
    }

    int member() {
        std::size_t first = pos_;
        type();
        expect_identifier();
        if (is_punct("(")) {
            ++pos_;
            std::vector<int> kids;
            if (!is_punct(")")) {
                kids.push_back(param());
                while (is_punct(",")) {
                    ++pos_;
                    kids.push_back(param());
                }
            }
            expect_punct(")");
            kids.push_back(block());
            return make(NodeKind::method_decl, first, std::move(kids));
        }
        std::vector<int> kids;
        if (is_punct("=")) {
            ++pos_;
            kids.push_back(expression().node);
        }
        expect_punct(";");
        return make(NodeKind::field_decl, first, std::move(kids));
    }

    int param() {
        std::size_t first = pos_;
        type();
        expect_identifier();
        return make(NodeKind::param, first);
    }

    int block() {
        std::size_t first = pos_;
        expect_punct("{");
        std::vector<int> stmts;
        while (!is_punct("}")) {
            if (at_eof()) fail("'}'");
            stmts.push_back(statement());
        }
        expect_punct("}");
        return make(NodeKind::block, first, std::move(stmts));
    }

    bool looks_like_var_decl() const {
        if (peek().kind != TokenKind::identifier) return false;
        std::size_t i = 1;
        while (is_punct("[", i) && is_punct("]", i + 1)) i += 2;
        return peek(i).kind == TokenKind::identifier;
    }

    int statement() {
        if (is_punct("{")) return block();
        if (is_keyword("if")) return if_statement();
        if (is_keyword("while")) return while_statement();
        if (is_keyword("for")) return for_statement();
        if (is_keyword("return")) return return_statement();
        if (looks_like_var_decl()) return var_decl();
        return expr_statement();
    }

    int if_statement() {
        std::size_t first = pos_;
        expect_keyword("if");
        expect_punct("(");
        std::vector<int> kids{expression().node};
        expect_punct(")");
        kids.push_back(statement());
        if (is_keyword("else")) {
            ++pos_;
            kids.push_back(statement());
        }
        return make(NodeKind::if_stmt, first, std::move(kids));
    }

    int while_statement() {
        std::size_t first = pos_;
        expect_keyword("while");
        expect_punct("(");
        std::vector<int> kids{expression().node};
        expect_punct(")");
        kids.push_back(statement());
        return make(NodeKind::while_stmt, first, std::move(kids));
    }

    int for_statement() {
        std::size_t first = pos_;
        expect_keyword("for");
        expect_punct("(");
        std::vector<int> kids;
        if (is_punct(";")) {
            ++pos_;
        } else if (looks_like_var_decl()) {
            kids.push_back(var_decl());
        } else {
            kids.push_back(expr_statement());
        }
        if (!is_punct(";")) kids.push_back(expression().node);
        expect_punct(";");
        if (!is_punct(")")) kids.push_back(expression().node);
        expect_punct(")");
        kids.push_back(statement());
        return make(NodeKind::for_stmt, first, std::move(kids));
    }

    int return_statement() {
        std::size_t first = pos_;
        expect_keyword("return");
        std::vector<int> kids;
        if (!is_punct(";")) kids.push_back(expression().node);
        expect_punct(";");
        return make(NodeKind::return_stmt, first, std::move(kids));
    }

    int var_decl() {
        std::size_t first = pos_;
        type();
        expect_identifier();
        std::vector<int> kids;
        if (is_punct("=")) {
            ++pos_;
            kids.push_back(expression().node);
        }
        expect_punct(";");
        return make(NodeKind::var_decl, first, std::move(kids));
    }

    int expr_statement() {
        std::size_t first = pos_;
        std::vector<int> kids{expression().node};
        expect_punct(";");
        return make(NodeKind::expr_stmt, first, std::move(kids));
    }

    Parsed expression() { return assignment(); }

    Parsed assignment() {
        Parsed lhs = logical_or();
        if (is_punct("=")) {
            ++pos_;
            Parsed rhs = assignment();
            return {make(NodeKind::assign, lhs.first, {lhs.node, rhs.node}, "="), lhs.first};
        }
        return lhs;
    }

    template <typename Next>
    Parsed binary_level(std::initializer_list<std::string_view> ops, Next next) {
        Parsed lhs = (this->*next)();
        for (;;) {
            std::optional<std::string> op;
            for (auto o : ops) {
                if (is_punct(o)) op = std::string(o);
            }
            if (!op) return lhs;
            ++pos_;
            Parsed rhs = (this->*next)();
            lhs = {make(NodeKind::binary, lhs.first, {lhs.node, rhs.node}, op), lhs.first};
        }
    }

    Parsed logical_or() { return binary_level({"||"}, &Parser::logical_and); }
    Parsed logical_and() { return binary_level({"&&"}, &Parser::equality); }
    Parsed equality() { return binary_level({"==", "!="}, &Parser::relational); }
    Parsed relational() { return binary_level({"<", "<=", ">", ">="}, &Parser::additive); }
    Parsed additive() { return binary_level({"+", "-"}, &Parser::multiplicative); }
    Parsed multiplicative() { return binary_level({"*", "/", "%"}, &Parser::unary); }

    Parsed unary() {
        if (is_punct("!") || is_punct("-")) {
            std::size_t first = pos_;
            std::string op = peek().text;
            ++pos_;
            Parsed operand = unary();
            return {make(NodeKind::unary, first, {operand.node}, op), first};
        }
        return postfix();
    }

    Parsed postfix() {
        Parsed expr = primary();
        for (;;) {
            if (is_punct("(")) {
                ++pos_;
                std::vector<int> kids{expr.node};
                if (!is_punct(")")) {
                    kids.push_back(expression().node);
                    while (is_punct(",")) {
                        ++pos_;
                        kids.push_back(expression().node);
                    }
                }
                expect_punct(")");
                expr = {make(NodeKind::call, expr.first, std::move(kids)), expr.first};
            } else if (is_punct(".")) {
                ++pos_;
                std::size_t name_first = pos_;
                if (peek().kind != TokenKind::identifier) fail("identifier");
                std::string name = peek().text;
                ++pos_;
                int name_node = make(NodeKind::identifier, name_first, {}, name);
                expr = {make(NodeKind::field_access, expr.first, {expr.node, name_node}), expr.first};
            } else if (is_punct("[")) {
                ++pos_;
                Parsed idx = expression();
                expect_punct("]");
                expr = {make(NodeKind::index, expr.first, {expr.node, idx.node}), expr.first};
            } else {
                return expr;
            }
        }
    }

    Parsed primary() {
        std::size_t first = pos_;
        const Token& t = peek();
        switch (t.kind) {
            case TokenKind::identifier: {
                std::string name = t.text;
                ++pos_;
                return {make(NodeKind::identifier, first, {}, name), first};
            }
            case TokenKind::int_literal:
            case TokenKind::float_literal:
            case TokenKind::string_literal:
            case TokenKind::char_literal: {
                std::string lexeme = t.text;
                ++pos_;
                return {make(NodeKind::literal, first, {}, lexeme), first};
            }
            case TokenKind::keyword:
                if (t.text == "true" || t.text == "false" || t.text == "null") {
                    std::string lexeme = t.text;
                    ++pos_;
                    return {make(NodeKind::literal, first, {}, lexeme), first};
                }
                break;
            case TokenKind::punct:
                if (t.text == "(") {
                    ++pos_;
                    Parsed inner = expression();
                    expect_punct(")");
                    return {inner.node, first};
                }
                break;
            case TokenKind::eof:
                break;
        }
        fail("expression");
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<TmpNode> arena_;
};

}  // namespace

AstGraph parse_source(std::string_view content, std::string file_path, int revision_index) {
    LexResult lexed = lex_minij_prefix(content);
    std::vector<Token>& tokens = lexed.tokens;

    TextLines text = split_lines(content);
    AstGraph g;
    g.file_path = std::move(file_path);
    g.revision_index = revision_index;
    g.line_count = static_cast<int>(text.lines.size());
    g.line_extents.assign(text.lines.size(), {0, 0});
    for (const auto& t : tokens) {
        if (t.kind == TokenKind::eof) continue;
        auto& ext = g.line_extents[t.line - 1];
        if (ext[0] == 0) ext[0] = t.col;
        ext[1] = t.end_col;
    }
    // A parse error before the first lexical error wins; otherwise the
    // lexical error is reported.
    std::vector<TmpNode> arena;
    try {
        arena = Parser(std::move(tokens)).run();
    } catch (const SyntaxError& e) {
        if (!lexed.error || std::tie(e.line, e.col) < std::tie(lexed.error->line, lexed.error->col)) throw;
    }
    if (lexed.error) throw SyntaxError(lexed.error->line, lexed.error->col, lexed.error->expected, lexed.error->found);
    const int last_line = std::max(1, g.line_count);
    const int last_col = text.lines.empty() ? 1 : std::max(1, static_cast<int>(text.lines.back().size()));
    arena[0].span = Span{1, 1, last_line, last_col};

    // Pre-order numbering.
    std::vector<int> order;
    order.reserve(arena.size());
    std::vector<int> new_id(arena.size(), -1);
    std::function<void(int)> visit = [&](int u) {
        new_id[u] = static_cast<int>(order.size());
        order.push_back(u);
        for (int c : arena[u].children) visit(c);
    };
    visit(0);

    g.nodes.reserve(order.size());
    for (int u : order) {
        g.nodes.push_back(AstNode{new_id[u], arena[u].kind, arena[u].token, arena[u].span});
    }
    for (int u : order) {
        const auto& kids = arena[u].children;
        for (std::size_t i = 0; i < kids.size(); ++i) {
            g.edges.push_back({new_id[u], new_id[kids[i]], EdgeKind::child});
            if (i + 1 < kids.size()) g.edges.push_back({new_id[kids[i]], new_id[kids[i + 1]], EdgeKind::next_sibling});
        }
    }
    std::sort(g.edges.begin(), g.edges.end());
    g.rebuild_index();
    return g;
}

// ---------------------------------------------------------------------------
// Queries

int node_span_cover(const AstGraph& graph, int line_start, int line_end) {
    if (graph.nodes.empty()) throw OutOfRange("empty graph");
    if (line_start < 1 || line_start > line_end) {
        throw OutOfRange(fmt::format("invalid line range [{}, {}]", line_start, line_end));
    }
    if (line_start > std::max(1, graph.line_count)) {
        throw OutOfRange(fmt::format("line {} beyond end of file ({} lines)", line_start, graph.line_count));
    }
    line_end = std::min(line_end, std::max(1, graph.line_count));

    // Token extent of the range, when it has tokens.
    std::optional<Span> extent;
    for (int l = line_start; l <= line_end && static_cast<std::size_t>(l) <= graph.line_extents.size(); ++l) {
        const auto& e = graph.line_extents[l - 1];
        if (e[0] == 0) continue;
        if (!extent) extent = Span{l, e[0], l, e[1]};
        extent->line_end = l;
        extent->col_end = e[1];
    }
    auto covers = [&](int id) {
        const Span& s = graph.nodes[id].span;
        if (extent) return s.contains(*extent);
        return s.line_start <= line_start && s.line_end >= line_end;
    };

    // Covering is inherited by ancestors, so only covering subtrees are searched.
    const int root_lines = graph.nodes[0].span.line_count();
    int best = 0;
    auto key = [&](int id) { return std::make_tuple(graph.nodes[id].span.line_count(), -graph.depth[id], id); };
    std::vector<int> stack = {0};
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        if (key(u) < key(best)) best = u;
        for (int c : graph.children[u]) {
            if (covers(c)) stack.push_back(c);
        }
    }
    if (graph.nodes[best].span.line_count() >= root_lines) return 0;
    return best;
}

std::vector<AdjEntry> to_adjacency(const AstGraph& graph, const std::set<EdgeKind>& edge_kinds, bool symmetric,
                                   bool self_loops) {
    std::vector<AdjEntry> out;
    for (const auto& e : graph.edges) {
        if (!edge_kinds.count(e.kind)) continue;
        out.push_back({e.src, e.dst, 1.0});
        if (symmetric) out.push_back({e.dst, e.src, 1.0});
    }
    if (self_loops) {
        for (const auto& n : graph.nodes) out.push_back({n.id, n.id, 1.0});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](const AdjEntry& a, const AdjEntry& b) { return a.row == b.row && a.col == b.col; }),
              out.end());
    return out;
}

std::vector<std::string> check_graph_invariants(const AstGraph& g) {
    std::vector<std::string> errs;
    const int n = static_cast<int>(g.nodes.size());
    if (n == 0) return {"graph has no nodes"};
    int roots = 0;
    for (int i = 0; i < n; ++i) {
        const AstNode& node = g.nodes[i];
        if (node.id != i) errs.push_back(fmt::format("node at position {} has id {}", i, node.id));
        if (g.parent[i] < 0) ++roots;
        const Span& s = node.span;
        if (std::tie(s.line_start, s.col_start) > std::tie(s.line_end, s.col_end) || s.line_start < 1 || s.col_start < 1) {
            errs.push_back(fmt::format("node {} has an empty span", i));
        }
        if (s.line_end > std::max(1, g.line_count)) errs.push_back(fmt::format("node {} extends past end of file", i));
        if (node.token.has_value() != kind_has_token(node.kind)) {
            errs.push_back(fmt::format("node {} ({}) token presence wrong", i, node_kind_name(node.kind)));
        }
    }
    if (roots != 1) errs.push_back(fmt::format("{} roots", roots));
    if (g.nodes[0].kind != NodeKind::compilation_unit || g.parent[0] != -1) errs.push_back("node 0 is not the root");
    for (const auto& e : g.edges) {
        if (e.kind != EdgeKind::child) continue;
        if (!(e.src < e.dst)) errs.push_back(fmt::format("CHILD edge ({}, {}) violates pre-order", e.src, e.dst));
        if (!g.nodes[e.src].span.contains(g.nodes[e.dst].span)) {
            errs.push_back(fmt::format("span of {} not inside parent {}", e.dst, e.src));
        }
    }
    // Sibling edges link consecutive children in source order.
    for (int p = 0; p < n; ++p) {
        const auto& kids = g.children[p];
        for (std::size_t i = 0; i + 1 < kids.size(); ++i) {
            AstEdge want{kids[i], kids[i + 1], EdgeKind::next_sibling};
            if (!std::binary_search(g.edges.begin(), g.edges.end(), want)) {
                errs.push_back(fmt::format("missing NEXT_SIBLING {} -> {}", kids[i], kids[i + 1]));
            }
            const Span& a = g.nodes[kids[i]].span;
            const Span& b = g.nodes[kids[i + 1]].span;
            if (std::tie(a.line_end, a.col_end) >= std::tie(b.line_start, b.col_start)) {
                errs.push_back(fmt::format("siblings {} and {} out of source order", kids[i], kids[i + 1]));
            }
        }
    }
    // Pre-order: each subtree occupies a contiguous id range starting at its root.
    std::vector<int> subtree(n, 1);
    for (int i = n - 1; i > 0; --i) subtree[g.parent[i] < 0 ? 0 : g.parent[i]] += subtree[i];
    for (int p = 0; p < n; ++p) {
        int expect = p + 1;
        for (int c : g.children[p]) {
            if (c != expect) errs.push_back(fmt::format("child {} of {} is not in pre-order position {}", c, p, expect));
            expect = c + subtree[c];
        }
    }
    return errs;
}

nlohmann::json to_json(const AstGraph& g) {
    using nlohmann::json;
    json nodes = json::array();
    for (const auto& n : g.nodes) {
        json jn = {{"id", n.id},
                   {"kind", node_kind_name(n.kind)},
                   {"span", {n.span.line_start, n.span.col_start, n.span.line_end, n.span.col_end}}};
        if (n.token) jn["token"] = *n.token;
        nodes.push_back(std::move(jn));
    }
    json edges = json::array();
    for (const auto& e : g.edges) {
        edges.push_back({e.src, e.dst, e.kind == EdgeKind::child ? "CHILD" : "NEXT_SIBLING"});
    }
    json extents = json::array();
    for (const auto& e : g.line_extents) extents.push_back({e[0], e[1]});
    return json{{"file_path", g.file_path},        {"revision_index", g.revision_index},
                {"line_count", g.line_count},      {"line_extents", std::move(extents)},
                {"nodes", std::move(nodes)},       {"edges", std::move(edges)}};
}

AstGraph graph_from_json(const nlohmann::json& j) {
    AstGraph g;
    try {
        g.file_path = j.at("file_path").get<std::string>();
        g.revision_index = j.at("revision_index").get<int>();
        g.line_count = j.at("line_count").get<int>();
        for (const auto& e : j.at("line_extents")) g.line_extents.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
        for (const auto& jn : j.at("nodes")) {
            AstNode n;
            n.id = jn.at("id").get<int>();
            auto kind = node_kind_from_name(jn.at("kind").get<std::string>());
            if (!kind) throw SchemaError("graph", "kind", "unknown node kind");
            n.kind = *kind;
            if (jn.contains("token")) n.token = jn["token"].get<std::string>();
            const auto& s = jn.at("span");
            n.span = Span{s.at(0).get<int>(), s.at(1).get<int>(), s.at(2).get<int>(), s.at(3).get<int>()};
            g.nodes.push_back(std::move(n));
        }
        for (const auto& je : j.at("edges")) {
            std::string kind = je.at(2).get<std::string>();
            g.edges.push_back({je.at(0).get<int>(), je.at(1).get<int>(),
                               kind == "CHILD" ? EdgeKind::child : EdgeKind::next_sibling});
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("graph", "<document>", e.what());
    }
    g.rebuild_index();
    return g;
}

}  // namespace mcrg
