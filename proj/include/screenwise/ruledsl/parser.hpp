#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "screenwise/core/error.hpp"
#include "screenwise/core/text.hpp"
#include "screenwise/ruledsl/ast.hpp"

namespace screenwise::ruledsl {

namespace detail {

enum class TokenType { Identifier, Number, Op, And, Or, Not, LParen, RParen, End };

struct Token {
    TokenType type;
    std::string_view text;
    std::size_t pos;
};

inline bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
inline bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
inline bool digit(char c) { return c >= '0' && c <= '9'; }

inline std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (c == '(' || c == ')') {
            out.push_back({c == '(' ? TokenType::LParen : TokenType::RParen, s.substr(i, 1), i});
            ++i;
        } else if (c == '<' || c == '>') {
            const std::size_t len = (i + 1 < s.size() && s[i + 1] == '=') ? 2 : 1;
            out.push_back({TokenType::Op, s.substr(i, len), i});
            i += len;
        } else if (ident_start(c)) {
            while (i < s.size() && ident_char(s[i])) ++i;
            auto word = s.substr(start, i - start);
            auto lower = lowercase(word);
            auto type = lower == "and" ? TokenType::And
                        : lower == "or" ? TokenType::Or
                        : lower == "not" ? TokenType::Not
                                         : TokenType::Identifier;
            out.push_back({type, word, start});
        } else if (digit(c) || c == '.' || c == '-' || c == '+') {
            if (c == '-' || c == '+') ++i;
            std::size_t digits = 0;
            while (i < s.size() && digit(s[i])) ++i, ++digits;
            if (i < s.size() && s[i] == '.') {
                ++i;
                while (i < s.size() && digit(s[i])) ++i, ++digits;
            }
            if (digits == 0) throw ParseError(start, "malformed number at position " + std::to_string(start));
            if (i < s.size() && (s[i] == 'e' || s[i] == 'E'))
                throw ParseError(i, "scientific notation is not supported (position " + std::to_string(i) + ")");
            if (i < s.size() && ident_char(s[i]))
                throw ParseError(i, "unexpected character after number at position " + std::to_string(i));
            out.push_back({TokenType::Number, s.substr(start, i - start), start});
        } else {
            throw ParseError(i, "unknown token '" + std::string(1, c) + "' at position " + std::to_string(i));
        }
    }
    out.push_back({TokenType::End, {}, s.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

    RuleExpr parse() {
        auto e = parse_or();
        if (peek().type != TokenType::End) fail("unexpected '" + std::string(peek().text) + "'");
        return e;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& take() { return tokens_[pos_++]; }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(peek().pos, what + " at position " + std::to_string(peek().pos));
    }

    RuleExpr parse_or() {
        auto left = parse_and();
        while (peek().type == TokenType::Or) {
            take();
            left = RuleExpr::either(std::move(left), parse_and());
        }
        return left;
    }

    RuleExpr parse_and() {
        auto left = parse_not();
        while (peek().type == TokenType::And) {
            take();
            left = RuleExpr::both(std::move(left), parse_not());
        }
        return left;
    }

    RuleExpr parse_not() {
        if (peek().type == TokenType::Not) {
            take();
            return RuleExpr::negate(parse_not());
        }
        return parse_primary();
    }

    RuleExpr parse_primary() {
        if (peek().type == TokenType::LParen) {
            take();
            auto inner = parse_or();
            if (peek().type != TokenType::RParen) fail("expected ')'");
            take();
            return inner;
        }
        if (peek().type != TokenType::Identifier) {
            if (peek().type == TokenType::End) fail("unexpected end of rule");
            fail("expected feature name, got '" + std::string(peek().text) + "'");
        }
        std::string feature(take().text);
        if (peek().type != TokenType::Op) fail("expected comparison operator after '" + feature + "'");
        auto op_text = take().text;
        CompareOp op = op_text == "<"    ? CompareOp::Less
                       : op_text == ">"  ? CompareOp::Greater
                       : op_text == "<=" ? CompareOp::LessEqual
                                         : CompareOp::GreaterEqual;
        if (peek().type != TokenType::Number) fail("expected numeric threshold");
        auto num = take().text;
        double value = 0.0;
        if (!parse_double(num, value)) throw ParseError(tokens_[pos_ - 1].pos, "bad number '" + std::string(num) + "'");
        return RuleExpr::compare(std::move(feature), op, value);
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

inline std::string format_threshold(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    return std::string(buf, ptr);
}

inline int precedence(RuleExpr::Kind k) {
    switch (k) {
    case RuleExpr::Kind::Or: return 1;
    case RuleExpr::Kind::And: return 2;
    case RuleExpr::Kind::Not: return 3;
    case RuleExpr::Kind::Compare: return 4;
    }
    return 0;
}

inline void print(const RuleExpr& e, std::string& out) {
    using K = RuleExpr::Kind;
    switch (e.kind()) {
    case K::Compare: {
        const auto& c = e.comparison();
        out += c.feature;
        out += ' ';
        out += symbol(c.op);
        out += ' ';
        out += format_threshold(c.threshold);
        return;
    }
    case K::Not: {
        out += "NOT ";
        const bool paren = precedence(e.child().kind()) < precedence(K::Not);
        if (paren) out += '(';
        print(e.child(), out);
        if (paren) out += ')';
        return;
    }
    case K::And:
    case K::Or: {
        const int prec = precedence(e.kind());
        // Left-associative: the left operand may share our precedence, the
        // right one must bind tighter.
        const bool lp = precedence(e.left().kind()) < prec;
        const bool rp = precedence(e.right().kind()) <= prec;
        if (lp) out += '(';
        print(e.left(), out);
        if (lp) out += ')';
        out += e.kind() == K::And ? " AND " : " OR ";
        if (rp) out += '(';
        print(e.right(), out);
        if (rp) out += ')';
        return;
    }
    }
}

}  // namespace detail

/// Parses rule text such as `(bm < -1.02 AND mom12m > 0.53) OR mve > 1.59`.
///
/// Precedence is NOT > AND > OR, binary operators are left-associative, and
/// keywords are case-insensitive. Thresholds are plain decimals with an
/// optional sign. Throws ParseError carrying the character offset.
inline RuleExpr parse_rule(std::string_view text) { return detail::Parser(text).parse(); }

/// Canonical text form; parse_rule(to_string(e)) == e.
inline std::string to_string(const RuleExpr& e) {
    std::string out;
    detail::print(e, out);
    return out;
}

}  // namespace screenwise::ruledsl
