#include "mcrg/ast.hpp"
#include "mcrg/errors.hpp"

#include <array>
#include <cctype>
#include <cstdio>

namespace mcrg {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

constexpr std::array<std::string_view, 9> kKeywords = {"class", "if",   "else",  "while", "for",
                                                       "return", "true", "false", "null"};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    // Appends to `out`, so a caller that catches SyntaxError keeps the
    // prefix lexed so far.
    void run(std::vector<Token>& out) {
        for (;;) {
            skip_trivia();
            if (pos_ >= src_.size()) {
                Token eof;
                eof.kind = TokenKind::eof;
                eof.line = eof.end_line = line_;
                eof.col = eof.end_col = col_;
                out.push_back(eof);
                return;
            }
            out.push_back(next());
        }
    }

private:
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f') {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && peek() != '\n') advance();
            } else if (c == '/' && peek(1) == '*') {
                int l = line_, cl = col_;
                advance();
                advance();
                for (;;) {
                    if (pos_ >= src_.size()) throw SyntaxError(l, cl, "'*/'", "end of input in block comment");
                    if (peek() == '*' && peek(1) == '/') {
                        advance();
                        advance();
                        break;
                    }
                    advance();
                }
            } else {
                return;
            }
        }
    }

    Token next() {
        Token t;
        t.line = line_;
        t.col = col_;
        const std::size_t start = pos_;
        char c = peek();
        if (ident_start(c)) {
            while (pos_ < src_.size() && ident_char(peek())) advance();
            t.text = std::string(src_.substr(start, pos_ - start));
            t.kind = TokenKind::identifier;
            for (auto kw : kKeywords) {
                if (kw == t.text) t.kind = TokenKind::keyword;
            }
        } else if (digit(c)) {
            t.kind = TokenKind::int_literal;
            while (digit(peek())) advance();
            if (peek() == '.' && digit(peek(1))) {
                t.kind = TokenKind::float_literal;
                advance();
                while (digit(peek())) advance();
            }
            if ((peek() == 'e' || peek() == 'E') &&
                (digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && digit(peek(2))))) {
                t.kind = TokenKind::float_literal;
                advance();
                if (peek() == '+' || peek() == '-') advance();
                while (digit(peek())) advance();
            }
            char s = peek();
            if (s == 'f' || s == 'F' || s == 'd' || s == 'D') {
                t.kind = TokenKind::float_literal;
                advance();
            } else if (s == 'l' || s == 'L') {
                advance();
            }
            if (ident_char(peek())) throw SyntaxError(line_, col_, "end of number", quote(peek()));
            t.text = std::string(src_.substr(start, pos_ - start));
        } else if (c == '"' || c == '\'') {
            t.kind = c == '"' ? TokenKind::string_literal : TokenKind::char_literal;
            advance();
            for (;;) {
                if (pos_ >= src_.size() || peek() == '\n') {
                    throw SyntaxError(t.line, t.col, std::string("closing ") + c, "unterminated literal");
                }
                if (peek() == '\\') {
                    advance();
                    if (pos_ >= src_.size() || peek() == '\n') continue;
                    advance();
                    continue;
                }
                if (peek() == c) {
                    advance();
                    break;
                }
                advance();
            }
            t.text = std::string(src_.substr(start, pos_ - start));
        } else {
            static constexpr std::array<std::string_view, 6> kTwo = {"==", "!=", "<=", ">=", "&&", "||"};
            static constexpr std::string_view kOne = "{}()[];,.=+-*/%!<>";
            t.kind = TokenKind::punct;
            bool matched = false;
            for (auto op : kTwo) {
                if (peek() == op[0] && peek(1) == op[1]) {
                    advance();
                    advance();
                    t.text = std::string(op);
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                if (kOne.find(c) == std::string_view::npos) throw SyntaxError(line_, col_, "token", quote(c));
                advance();
                t.text = std::string(1, c);
            }
        }
        t.end_line = line_;
        t.end_col = col_ - 1;
        return t;
    }

    static std::string quote(char c) {
        if (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7f) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "0x%02x", static_cast<unsigned char>(c));
            return buf;
        }
        return std::string("'") + c + "'";
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace

std::vector<Token> lex_minij(std::string_view content) {
    std::vector<Token> out;
    Lexer(content).run(out);
    return out;
}

LexResult lex_minij_prefix(std::string_view content) {
    Lexer lexer(content);
    LexResult out;
    try {
        lexer.run(out.tokens);
    } catch (const SyntaxError& e) {
        out.error = LexError{e.line, e.col, e.expected, e.found};
        Token eof;
        eof.kind = TokenKind::eof;
        eof.line = eof.end_line = e.line;
        eof.col = eof.end_col = e.col;
        out.tokens.push_back(eof);
    }
    return out;
}

}  // namespace mcrg
