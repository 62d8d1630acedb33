#include "reqsolve/python/ast.hpp"

#include "reqsolve/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

namespace reqsolve::py {

std::optional<std::string> Expr::dotted() const {
    if (kind == Kind::name) return id;
    if (kind == Kind::attribute && base) {
        auto prefix = base->dotted();
        if (!prefix) return std::nullopt;
        return *prefix + "." + id;
    }
    return std::nullopt;
}

namespace {

// ---------------------------------------------------------------------------
// Tokens

enum class Tok { name, number, string, op, newline, indent, dedent, end };

struct Token {
    Tok type;
    std::string text;
    int line;
    std::size_t begin;
    std::size_t end;
};

struct SyntaxError {
    int line;
    std::string message;
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

class Tokenizer {
public:
    explicit Tokenizer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        indents_.push_back(0);
        while (pos_ < src_.size()) {
            if (at_line_start_ && depth_ == 0) {
                if (!handle_indentation()) continue;
            }
            const char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\f') {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else if (c == '\\' && next_is_newline(pos_ + 1)) {
                pos_ = skip_newline(pos_ + 1);
                ++line_;
            } else if (c == '\r' || c == '\n') {
                pos_ = skip_newline(pos_);
                if (depth_ == 0) {
                    if (!tokens_.empty() && tokens_.back().type != Tok::newline &&
                        tokens_.back().type != Tok::indent && tokens_.back().type != Tok::dedent)
                        push(Tok::newline, "", pos_, pos_);
                    at_line_start_ = true;
                }
                ++line_;
            } else if (ident_start(static_cast<unsigned char>(c))) {
                read_name();
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '.' && pos_ + 1 < src_.size() &&
                        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
                read_number();
            } else if (c == '"' || c == '\'') {
                read_string(pos_, pos_);
            } else {
                read_op();
            }
        }
        if (!tokens_.empty() && tokens_.back().type != Tok::newline &&
            tokens_.back().type != Tok::dedent && tokens_.back().type != Tok::indent)
            push(Tok::newline, "", pos_, pos_);
        while (indents_.size() > 1) {
            indents_.pop_back();
            push(Tok::dedent, "", pos_, pos_);
        }
        push(Tok::end, "", pos_, pos_);
        return std::move(tokens_);
    }

private:
    bool next_is_newline(std::size_t p) const {
        return p < src_.size() && (src_[p] == '\n' || src_[p] == '\r');
    }
    std::size_t skip_newline(std::size_t p) const {
        if (src_[p] == '\r' && p + 1 < src_.size() && src_[p + 1] == '\n') return p + 2;
        return p + 1;
    }

    void push(Tok t, std::string text, std::size_t b, std::size_t e) {
        tokens_.push_back({t, std::move(text), line_, b, e});
    }

    // Returns false when the line was blank/comment-only and has been consumed.
    bool handle_indentation() {
        int col = 0;
        std::size_t p = pos_;
        while (p < src_.size()) {
            if (src_[p] == ' ') ++col;
            else if (src_[p] == '\t') col = (col / 8 + 1) * 8;
            else if (src_[p] == '\f') col = 0;
            else break;
            ++p;
        }
        if (p >= src_.size()) {
            pos_ = p;
            return false;
        }
        if (src_[p] == '#' || src_[p] == '\n' || src_[p] == '\r' ||
            (src_[p] == '\\' && next_is_newline(p + 1))) {
            while (p < src_.size() && src_[p] != '\n') ++p;
            if (p < src_.size()) ++p;
            ++line_;
            pos_ = p;
            return false;
        }
        pos_ = p;
        at_line_start_ = false;
        if (col > indents_.back()) {
            indents_.push_back(col);
            push(Tok::indent, "", p, p);
        } else {
            while (col < indents_.back()) {
                indents_.pop_back();
                push(Tok::dedent, "", p, p);
            }
            if (col != indents_.back()) throw SyntaxError{line_, "unindent does not match any outer level"};
        }
        return true;
    }

    void read_name() {
        const std::size_t b = pos_;
        while (pos_ < src_.size() && ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::string text(src_.substr(b, pos_ - b));
        if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'') && text.size() <= 2) {
            std::string lower = text;
            std::transform(lower.begin(), lower.end(), lower.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            static const std::unordered_set<std::string> kPrefixes = {
                "r", "u", "b", "f", "br", "rb", "fr", "rf"};
            if (kPrefixes.count(lower)) {
                read_string(b, pos_);
                return;
            }
        }
        push(Tok::name, std::move(text), b, pos_);
    }

    void read_number() {
        const std::size_t b = pos_;
        auto digitish = [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '.'; };
        while (pos_ < src_.size()) {
            const auto c = static_cast<unsigned char>(src_[pos_]);
            if ((c == '+' || c == '-') && pos_ > b &&
                (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E') &&
                !(src_[b] == '0' && pos_ - b >= 2 && (src_[b + 1] == 'x' || src_[b + 1] == 'X'))) {
                ++pos_;
                continue;
            }
            if (!digitish(c)) break;
            ++pos_;
        }
        push(Tok::number, std::string(src_.substr(b, pos_ - b)), b, pos_);
    }

    void read_string(std::size_t token_begin, std::size_t quote_pos) {
        const int start_line = line_;
        const char q = src_[quote_pos];
        const bool triple = quote_pos + 2 < src_.size() && src_[quote_pos + 1] == q && src_[quote_pos + 2] == q;
        std::size_t p = quote_pos + (triple ? 3 : 1);
        while (true) {
            if (p >= src_.size()) throw SyntaxError{start_line, "unterminated string literal"};
            const char c = src_[p];
            if (c == '\\') {
                if (p + 1 < src_.size() && src_[p + 1] == '\n') ++line_;
                p += 2;
                continue;
            }
            if (c == '\n') {
                if (!triple) throw SyntaxError{start_line, "unterminated string literal"};
                ++line_;
            }
            if (c == q) {
                if (!triple) {
                    ++p;
                    break;
                }
                if (p + 2 < src_.size() && src_[p + 1] == q && src_[p + 2] == q) {
                    p += 3;
                    break;
                }
            }
            ++p;
        }
        tokens_.push_back({Tok::string, std::string(src_.substr(token_begin, p - token_begin)), start_line,
                           token_begin, p});
        pos_ = p;
    }

    void read_op() {
        static constexpr std::array<std::string_view, 24> kMulti = {
            "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=",
            ">=",  "==",  "!=",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@="};
        for (auto op : kMulti) {
            if (src_.substr(pos_, op.size()) == op) {
                push(Tok::op, std::string(op), pos_, pos_ + op.size());
                pos_ += op.size();
                return;
            }
        }
        const char c = src_[pos_];
        static constexpr std::string_view kSingle = "()[]{}:,;.+-*/%@=<>&|^~!";
        if (kSingle.find(c) == std::string_view::npos)
            throw SyntaxError{line_, std::string("unexpected character '") + c + "'"};
        if (c == '(' || c == '[' || c == '{') ++depth_;
        if (c == ')' || c == ']' || c == '}') depth_ = std::max(0, depth_ - 1);
        push(Tok::op, std::string(1, c), pos_, pos_ + 1);
        ++pos_;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int depth_ = 0;
    bool at_line_start_ = true;
    std::vector<int> indents_;
    std::vector<Token> tokens_;
};

// ---------------------------------------------------------------------------
// Parser

const std::unordered_set<std::string_view>& hard_keywords() {
    static const std::unordered_set<std::string_view> kw = {
        "False", "None",   "True",    "and",      "as",     "assert", "async", "await",
        "break", "class",  "continue", "def",     "del",    "elif",   "else",  "except",
        "finally", "for",  "from",    "global",   "if",     "import", "in",    "is",
        "lambda", "nonlocal", "not",  "or",       "pass",   "raise",  "return", "try",
        "while", "with",   "yield"};
    return kw;
}

ExprPtr make(Expr::Kind k, int line) {
    auto e = std::make_unique<Expr>();
    e->kind = k;
    e->line = line;
    return e;
}

class Parser {
public:
    Parser(std::string_view src, std::vector<Token> toks) : src_(src), toks_(std::move(toks)) {}

    Module parse() {
        Module m;
        while (!at(Tok::end)) {
            if (at(Tok::newline)) {
                ++i_;
                continue;
            }
            statement(m.body);
        }
        return m;
    }

private:
    // -- token helpers ------------------------------------------------------
    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(i_ + ahead, toks_.size() - 1)];
    }
    bool at(Tok t) const { return peek().type == t; }
    bool at_op(std::string_view op, std::size_t ahead = 0) const {
        const auto& t = peek(ahead);
        return t.type == Tok::op && t.text == op;
    }
    bool at_kw(std::string_view kw, std::size_t ahead = 0) const {
        const auto& t = peek(ahead);
        return t.type == Tok::name && t.text == kw;
    }
    const Token& next() {
        const Token& t = toks_[i_];
        if (i_ + 1 < toks_.size()) ++i_;
        return t;
    }
    [[noreturn]] void fail(const std::string& what) const { throw SyntaxError{peek().line, what}; }
    void expect_op(std::string_view op) {
        if (!at_op(op)) fail("expected '" + std::string(op) + "' near '" + peek().text + "'");
        next();
    }
    void expect_kw(std::string_view kw) {
        if (!at_kw(kw)) fail("expected '" + std::string(kw) + "'");
        next();
    }
    std::string expect_name() {
        if (!at(Tok::name) || hard_keywords().count(peek().text)) fail("expected identifier near '" + peek().text + "'");
        return next().text;
    }
    bool accept_op(std::string_view op) {
        if (at_op(op)) {
            next();
            return true;
        }
        return false;
    }
    bool accept_kw(std::string_view kw) {
        if (at_kw(kw)) {
            next();
            return true;
        }
        return false;
    }

    std::string source_text(std::size_t first_tok, std::size_t last_tok) const {
        const auto b = toks_[first_tok].begin;
        const auto e = toks_[last_tok].end;
        std::string out;
        bool space = false;
        for (char c : src_.substr(b, e - b)) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                space = true;
                continue;
            }
            if (space && !out.empty()) out += ' ';
            space = false;
            out += c;
        }
        return out;
    }

    // -- statements ---------------------------------------------------------
    void statement(Body& out) {
        if (at_op("@")) {
            std::vector<ExprPtr> decorators;
            while (accept_op("@")) {
                decorators.push_back(named_expr());
                if (!at(Tok::newline)) fail("expected newline after decorator");
                next();
            }
            accept_kw("async");
            if (at_kw("def")) function_def(out, std::move(decorators));
            else if (at_kw("class")) class_def(out, std::move(decorators));
            else fail("decorator must precede def or class");
            return;
        }
        if (at(Tok::name)) {
            const auto& w = peek().text;
            if (w == "def") return function_def(out, {});
            if (w == "class") return class_def(out, {});
            if (w == "async" && (at_kw("def", 1) || at_kw("for", 1) || at_kw("with", 1))) {
                next();
                return statement(out);
            }
            if (w == "if" || w == "while") return if_while(out);
            if (w == "for") return for_stmt(out);
            if (w == "try") return try_stmt(out);
            if (w == "with") return with_stmt(out);
            if (w == "match" && looks_like_match()) return match_stmt(out);
        }
        simple_statements(out);
    }

    bool looks_like_match() const {
        // `match <subject>:` NEWLINE INDENT
        if (peek(1).type == Tok::newline) return false;
        if (peek(1).type == Tok::op && peek(1).text != "(" && peek(1).text != "[" &&
            peek(1).text != "{" && peek(1).text != "-" && peek(1).text != "*")
            return false;
        std::size_t k = i_;
        int depth = 0;
        while (k < toks_.size() && toks_[k].type != Tok::end) {
            const auto& t = toks_[k];
            if (t.type == Tok::newline && depth == 0) break;
            if (t.type == Tok::op) {
                if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
                if (t.text == ")" || t.text == "]" || t.text == "}") --depth;
            }
            ++k;
        }
        return k > 0 && toks_[k - 1].type == Tok::op && toks_[k - 1].text == ":" &&
               k + 1 < toks_.size() && toks_[k + 1].type == Tok::indent;
    }

    Body suite() {
        expect_op(":");
        Body body;
        if (at(Tok::newline)) {
            next();
            if (!at(Tok::indent)) fail("expected an indented block");
            next();
            while (!at(Tok::dedent) && !at(Tok::end)) {
                if (at(Tok::newline)) {
                    next();
                    continue;
                }
                statement(body);
            }
            if (at(Tok::dedent)) next();
        } else {
            simple_statements(body);
        }
        return body;
    }

    void skip_type_params() {
        if (!at_op("[")) return;
        int depth = 0;
        do {
            if (at_op("[")) ++depth;
            if (at_op("]")) --depth;
            if (at(Tok::end)) fail("unterminated type parameter list");
            next();
        } while (depth > 0);
    }

    void function_def(Body& out, std::vector<ExprPtr> decorators) {
        Stmt s;
        s.kind = Stmt::Kind::function_def;
        s.line = peek().line;
        expect_kw("def");
        s.name = expect_name();
        skip_type_params();
        expect_op("(");
        s.params = parameters(")", true);
        expect_op(")");
        if (accept_op("->")) s.exprs.push_back(test());
        s.decorators = std::move(decorators);
        s.bodies.push_back(suite());
        out.push_back(std::move(s));
    }

    std::vector<Param> parameters(std::string_view closer, bool annotations) {
        std::vector<Param> params;
        bool keyword_only = false;
        while (!at_op(closer)) {
            Param p;
            if (accept_op("/")) {
                for (auto& prev : params) prev.positional_only = true;
            } else if (accept_op("**")) {
                p.kind = Param::Kind::var_keyword;
                p.name = expect_name();
                if (annotations && at_op(":")) p.annotation = annotation();
                params.push_back(std::move(p));
            } else if (accept_op("*")) {
                keyword_only = true;
                if (at(Tok::name)) {
                    p.kind = Param::Kind::var_positional;
                    p.name = expect_name();
                    if (annotations && at_op(":")) p.annotation = annotation();
                    params.push_back(std::move(p));
                }
            } else {
                p.kind = keyword_only ? Param::Kind::keyword_only : Param::Kind::positional;
                p.name = expect_name();
                if (annotations && at_op(":")) p.annotation = annotation();
                if (accept_op("=")) {
                    p.has_default = true;
                    (void)test();
                }
                params.push_back(std::move(p));
            }
            if (!accept_op(",")) break;
        }
        return params;
    }

    std::string annotation() {
        expect_op(":");
        const auto first = i_;
        (void)test();
        return source_text(first, i_ - 1);
    }

    void class_def(Body& out, std::vector<ExprPtr> decorators) {
        Stmt s;
        s.kind = Stmt::Kind::class_def;
        s.line = peek().line;
        expect_kw("class");
        s.name = expect_name();
        skip_type_params();
        if (accept_op("(")) {
            auto call = make(Expr::Kind::call, s.line);
            arguments(*call);
            expect_op(")");
            s.bases = std::move(call->args);
            s.class_keywords = std::move(call->keywords);
        }
        s.decorators = std::move(decorators);
        s.bodies.push_back(suite());
        out.push_back(std::move(s));
    }

    void if_while(Body& out) {
        Stmt s;
        s.kind = Stmt::Kind::compound;
        s.line = peek().line;
        next();
        s.exprs.push_back(named_expr());
        s.bodies.push_back(suite());
        while (at_kw("elif")) {
            next();
            s.exprs.push_back(named_expr());
            s.bodies.push_back(suite());
        }
        if (accept_kw("else")) s.bodies.push_back(suite());
        out.push_back(std::move(s));
    }

    void for_stmt(Body& out) {
        Stmt s;
        s.kind = Stmt::Kind::compound;
        s.line = peek().line;
        expect_kw("for");
        s.targets.push_back(target_list());
        expect_kw("in");
        s.exprs.push_back(star_expressions());
        s.bodies.push_back(suite());
        if (accept_kw("else")) s.bodies.push_back(suite());
        out.push_back(std::move(s));
    }

    void try_stmt(Body& out) {
        Stmt s;
        s.kind = Stmt::Kind::compound;
        s.line = peek().line;
        expect_kw("try");
        s.bodies.push_back(suite());
        while (at_kw("except")) {
            next();
            accept_op("*");
            if (!at_op(":")) {
                s.exprs.push_back(test());
                if (accept_op(",")) s.exprs.push_back(test());
                if (accept_kw("as")) (void)expect_name();
            }
            s.bodies.push_back(suite());
        }
        if (accept_kw("else")) s.bodies.push_back(suite());
        if (accept_kw("finally")) s.bodies.push_back(suite());
        out.push_back(std::move(s));
    }

    void with_item(Stmt& s) {
        s.exprs.push_back(test());
        if (accept_kw("as")) s.targets.push_back(target());
    }

    void with_stmt(Body& out) {
        Stmt s;
        s.kind = Stmt::Kind::compound;
        s.line = peek().line;
        expect_kw("with");
        bool done = false;
        if (at_op("(")) {
            // Parenthesized item list; fall back to a plain expression on failure.
            const auto save = i_;
            try {
                Stmt trial;
                next();
                while (!at_op(")")) {
                    with_item(trial);
                    if (!accept_op(",")) break;
                }
                expect_op(")");
                if (!at_op(":")) throw SyntaxError{peek().line, "not a parenthesized with"};
                s.exprs = std::move(trial.exprs);
                s.targets = std::move(trial.targets);
                done = true;
            } catch (const SyntaxError&) {
                i_ = save;
            }
        }
        if (!done) {
            do {
                with_item(s);
            } while (accept_op(","));
        }
        s.bodies.push_back(suite());
        out.push_back(std::move(s));
    }

    void skip_until_colon() {
        int depth = 0;
        while (!at(Tok::end)) {
            if (depth == 0 && at_op(":")) return;
            if (at_op("(") || at_op("[") || at_op("{")) ++depth;
            if (at_op(")") || at_op("]") || at_op("}")) --depth;
            if (at(Tok::newline) && depth == 0) fail("expected ':'");
            next();
        }
    }

    void match_stmt(Body& out) {
        Stmt s;
        s.kind = Stmt::Kind::compound;
        s.line = peek().line;
        next();
        s.exprs.push_back(star_expressions());
        expect_op(":");
        if (!at(Tok::newline)) fail("expected newline after match");
        next();
        if (!at(Tok::indent)) fail("expected case block");
        next();
        while (!at(Tok::dedent) && !at(Tok::end)) {
            if (at(Tok::newline)) {
                next();
                continue;
            }
            if (!at_kw("case")) fail("expected 'case'");
            next();
            skip_until_colon();
            s.bodies.push_back(suite());
        }
        if (at(Tok::dedent)) next();
        out.push_back(std::move(s));
    }

    void simple_statements(Body& out) {
        simple_statement(out);
        while (accept_op(";")) {
            if (at(Tok::newline) || at(Tok::end)) break;
            simple_statement(out);
        }
        if (at(Tok::newline)) next();
        else if (!at(Tok::end) && !at(Tok::dedent)) fail("unexpected token '" + peek().text + "'");
    }

    void import_stmt(Body& out) {
        Stmt s;
        s.kind = Stmt::Kind::import;
        s.line = peek().line;
        expect_kw("import");
        do {
            ImportAlias a;
            a.name = dotted_name();
            if (accept_kw("as")) a.asname = expect_name();
            s.aliases.push_back(std::move(a));
        } while (accept_op(","));
        out.push_back(std::move(s));
    }

    std::string dotted_name() {
        std::string name = expect_name();
        while (at_op(".") && peek(1).type == Tok::name) {
            next();
            name += "." + expect_name();
        }
        return name;
    }

    void from_stmt(Body& out) {
        Stmt s;
        s.kind = Stmt::Kind::import_from;
        s.line = peek().line;
        expect_kw("from");
        while (at_op(".") || at_op("...")) s.level += static_cast<int>(next().text.size());
        if (!at_kw("import")) s.module = dotted_name();
        expect_kw("import");
        if (accept_op("*")) {
            s.aliases.push_back({"*", ""});
        } else {
            const bool paren = accept_op("(");
            do {
                if (paren && at_op(")")) break;
                ImportAlias a;
                a.name = expect_name();
                if (accept_kw("as")) a.asname = expect_name();
                s.aliases.push_back(std::move(a));
            } while (accept_op(","));
            if (paren) expect_op(")");
        }
        out.push_back(std::move(s));
    }

    void simple_statement(Body& out) {
        const int line = peek().line;
        if (at(Tok::name)) {
            const auto w = peek().text;
            if (w == "import") return import_stmt(out);
            if (w == "from") return from_stmt(out);
            if (w == "pass" || w == "break" || w == "continue") {
                next();
                return;
            }
            if (w == "global" || w == "nonlocal") {
                next();
                do {
                    (void)expect_name();
                } while (accept_op(","));
                return;
            }
            if (w == "return") {
                next();
                Stmt s;
                s.kind = Stmt::Kind::ret;
                s.line = line;
                if (!end_of_simple()) s.exprs.push_back(star_expressions());
                out.push_back(std::move(s));
                return;
            }
            if (w == "raise" || w == "del" || w == "assert") {
                next();
                Stmt s;
                s.kind = Stmt::Kind::expr;
                s.line = line;
                if (!end_of_simple()) {
                    s.exprs.push_back(star_expressions());
                    if (w == "raise" && accept_kw("from")) s.exprs.push_back(test());
                    if (w == "assert" && accept_op(",")) s.exprs.push_back(test());
                }
                out.push_back(std::move(s));
                return;
            }
            if (w == "type" && peek(1).type == Tok::name && (at_op("=", 2) || at_op("[", 2))) {
                while (!end_of_simple()) next();
                return;
            }
        }

        ExprPtr first = at_kw("yield") ? yield_expr() : star_expressions();
        if (at_op(":")) {
            Stmt s;
            s.kind = Stmt::Kind::assign;
            s.line = line;
            s.annotation = annotation();
            s.targets.push_back(std::move(first));
            if (accept_op("=")) s.value = at_kw("yield") ? yield_expr() : star_expressions();
            out.push_back(std::move(s));
            return;
        }
        static const std::unordered_set<std::string_view> kAug = {
            "+=", "-=", "*=", "/=", "//=", "%=", "**=", ">>=", "<<=", "&=", "|=", "^=", "@="};
        if (at(Tok::op) && kAug.count(peek().text)) {
            next();
            Stmt s;
            s.kind = Stmt::Kind::aug_assign;
            s.line = line;
            s.targets.push_back(std::move(first));
            s.value = at_kw("yield") ? yield_expr() : star_expressions();
            out.push_back(std::move(s));
            return;
        }
        if (at_op("=")) {
            Stmt s;
            s.kind = Stmt::Kind::assign;
            s.line = line;
            ExprPtr value = std::move(first);
            while (accept_op("=")) {
                s.targets.push_back(std::move(value));
                value = at_kw("yield") ? yield_expr() : star_expressions();
            }
            s.value = std::move(value);
            out.push_back(std::move(s));
            return;
        }
        Stmt s;
        s.kind = Stmt::Kind::expr;
        s.line = line;
        s.exprs.push_back(std::move(first));
        out.push_back(std::move(s));
    }

    bool end_of_simple() const { return at(Tok::newline) || at_op(";") || at(Tok::end); }

    // -- expressions --------------------------------------------------------
    ExprPtr yield_expr() {
        auto e = make(Expr::Kind::other, peek().line);
        expect_kw("yield");
        if (accept_kw("from")) {
            e->children.push_back(test());
        } else if (!end_of_simple() && !at_op(")") && !at_op("=")) {
            e->children.push_back(star_expressions());
        }
        return e;
    }

    ExprPtr star_expressions() {
        const int line = peek().line;
        auto first = star_or_named();
        if (!at_op(",")) return first;
        auto tuple = make(Expr::Kind::other, line);
        tuple->children.push_back(std::move(first));
        while (accept_op(",")) {
            if (!starts_expression()) break;
            tuple->children.push_back(star_or_named());
        }
        return tuple;
    }

    bool starts_expression() const {
        const auto& t = peek();
        if (t.type == Tok::name) {
            if (!hard_keywords().count(t.text)) return true;
            return t.text == "not" || t.text == "lambda" || t.text == "await" || t.text == "None" ||
                   t.text == "True" || t.text == "False" || t.text == "yield";
        }
        if (t.type == Tok::number || t.type == Tok::string) return true;
        if (t.type == Tok::op)
            return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" || t.text == "+" ||
                   t.text == "~" || t.text == "*" || t.text == "..." || t.text == "**";
        return false;
    }

    ExprPtr star_or_named() {
        if (at_op("*")) {
            auto e = make(Expr::Kind::starred, peek().line);
            next();
            e->base = bit_or();
            return e;
        }
        return named_expr();
    }

    ExprPtr named_expr() {
        auto e = test();
        if (at_op(":=")) {
            auto w = make(Expr::Kind::other, e->line);
            next();
            w->children.push_back(std::move(e));
            w->children.push_back(test());
            return w;
        }
        return e;
    }

    ExprPtr test() {
        if (at_kw("lambda")) return lambda();
        auto e = or_test();
        if (at_kw("if")) {
            auto t = make(Expr::Kind::other, e->line);
            next();
            t->children.push_back(std::move(e));
            t->children.push_back(or_test());
            expect_kw("else");
            t->children.push_back(test());
            return t;
        }
        return e;
    }

    ExprPtr lambda() {
        auto e = make(Expr::Kind::lambda, peek().line);
        expect_kw("lambda");
        (void)parameters(":", false);
        expect_op(":");
        e->children.push_back(test());
        return e;
    }

    template <typename Sub>
    ExprPtr binary(Sub sub, std::initializer_list<std::string_view> ops, bool keyword_ops = false) {
        auto left = (this->*sub)();
        while (true) {
            bool hit = false;
            for (auto op : ops) {
                if (keyword_ops ? at_kw(op) : at_op(op)) {
                    hit = true;
                    break;
                }
            }
            if (!hit) return left;
            next();
            auto node = make(Expr::Kind::other, left->line);
            node->children.push_back(std::move(left));
            node->children.push_back((this->*sub)());
            left = std::move(node);
        }
    }

    ExprPtr or_test() { return binary(&Parser::and_test, {"or"}, true); }
    ExprPtr and_test() { return binary(&Parser::not_test, {"and"}, true); }
    ExprPtr not_test() {
        if (at_kw("not")) {
            auto e = make(Expr::Kind::other, peek().line);
            next();
            e->children.push_back(not_test());
            return e;
        }
        return comparison();
    }

    bool at_comparison() const {
        if (at(Tok::op)) {
            const auto& t = peek().text;
            return t == "<" || t == ">" || t == "==" || t == ">=" || t == "<=" || t == "!=";
        }
        return at_kw("in") || at_kw("is") || (at_kw("not") && at_kw("in", 1));
    }

    ExprPtr comparison() {
        auto left = bit_or();
        if (!at_comparison()) return left;
        auto node = make(Expr::Kind::other, left->line);
        node->children.push_back(std::move(left));
        while (at_comparison()) {
            if (at_kw("not")) next();
            else if (at_kw("is")) {
                next();
                accept_kw("not");
                node->children.push_back(bit_or());
                continue;
            }
            next();
            node->children.push_back(bit_or());
        }
        return node;
    }

    ExprPtr bit_or() { return binary(&Parser::bit_xor, {"|"}); }
    ExprPtr bit_xor() { return binary(&Parser::bit_and, {"^"}); }
    ExprPtr bit_and() { return binary(&Parser::shift, {"&"}); }
    ExprPtr shift() { return binary(&Parser::arith, {"<<", ">>"}); }
    ExprPtr arith() { return binary(&Parser::term, {"+", "-"}); }
    ExprPtr term() { return binary(&Parser::factor, {"*", "/", "//", "%", "@"}); }

    ExprPtr factor() {
        if (at_op("+") || at_op("-") || at_op("~")) {
            auto e = make(Expr::Kind::other, peek().line);
            next();
            e->children.push_back(factor());
            return e;
        }
        return power();
    }

    ExprPtr power() {
        if (at_kw("await")) {
            const int line = peek().line;
            next();
            auto e = make(Expr::Kind::other, line);
            e->children.push_back(power());
            return e;
        }
        auto e = primary();
        if (at_op("**")) {
            next();
            auto p = make(Expr::Kind::other, e->line);
            p->children.push_back(std::move(e));
            p->children.push_back(factor());
            return p;
        }
        return e;
    }

    ExprPtr primary() {
        auto e = atom();
        while (true) {
            if (at_op(".")) {
                next();
                auto a = make(Expr::Kind::attribute, e->line);
                a->id = expect_name();
                a->base = std::move(e);
                e = std::move(a);
            } else if (at_op("(")) {
                next();
                auto c = make(Expr::Kind::call, e->line);
                c->base = std::move(e);
                arguments(*c);
                expect_op(")");
                e = std::move(c);
            } else if (at_op("[")) {
                next();
                auto s = make(Expr::Kind::subscript, e->line);
                s->base = std::move(e);
                subscripts(*s);
                expect_op("]");
                e = std::move(s);
            } else {
                return e;
            }
        }
    }

    void arguments(Expr& call) {
        while (!at_op(")")) {
            if (at_op("**")) {
                next();
                call.keywords.push_back({"", test()});
            } else if (at_op("*")) {
                auto s = make(Expr::Kind::starred, peek().line);
                next();
                s->base = test();
                call.args.push_back(std::move(s));
            } else if (at(Tok::name) && at_op("=", 1)) {
                std::string name = next().text;
                next();
                call.keywords.push_back({std::move(name), test()});
            } else {
                auto arg = named_expr();
                if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
                    auto gen = make(Expr::Kind::other, arg->line);
                    gen->children.push_back(std::move(arg));
                    comprehension_tail(*gen);
                    arg = std::move(gen);
                }
                call.args.push_back(std::move(arg));
            }
            if (!accept_op(",")) break;
        }
    }

    void subscripts(Expr& sub) {
        while (!at_op("]")) {
            auto slice = make(Expr::Kind::other, peek().line);
            if (at_op("*")) {
                sub.children.push_back(star_or_named());
            } else {
                if (!at_op(":")) slice->children.push_back(named_expr());
                if (accept_op(":")) {
                    if (!at_op(":") && !at_op("]") && !at_op(",")) slice->children.push_back(test());
                    if (accept_op(":") && !at_op("]") && !at_op(",")) slice->children.push_back(test());
                    sub.children.push_back(std::move(slice));
                } else {
                    sub.children.push_back(std::move(slice->children.front()));
                }
            }
            if (!accept_op(",")) break;
        }
    }

    // Targets of `for` and comprehension clauses: no bare comparisons allowed.
    ExprPtr target() {
        if (at_op("*")) {
            auto e = make(Expr::Kind::starred, peek().line);
            next();
            e->base = bit_or();
            return e;
        }
        return bit_or();
    }

    ExprPtr target_list() {
        auto first = target();
        if (!at_op(",")) return first;
        auto tuple = make(Expr::Kind::other, first->line);
        tuple->children.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_kw("in") || at_op("=")) break;
            tuple->children.push_back(target());
        }
        return tuple;
    }

    void comprehension_tail(Expr& node) {
        while (true) {
            if (at_kw("async") && at_kw("for", 1)) next();
            if (accept_kw("for")) {
                node.children.push_back(target_list());
                expect_kw("in");
                node.children.push_back(or_test());
            } else if (accept_kw("if")) {
                node.children.push_back(or_test_or_lambda());
            } else {
                return;
            }
        }
    }

    ExprPtr or_test_or_lambda() { return at_kw("lambda") ? lambda() : or_test(); }

    ExprPtr atom() {
        const Token& t = peek();
        switch (t.type) {
            case Tok::name: {
                if (t.text == "None" || t.text == "True" || t.text == "False") {
                    next();
                    return make(Expr::Kind::constant, t.line);
                }
                if (hard_keywords().count(t.text)) fail("unexpected keyword '" + t.text + "'");
                auto e = make(Expr::Kind::name, t.line);
                e->id = next().text;
                return e;
            }
            case Tok::number: {
                next();
                return make(Expr::Kind::constant, t.line);
            }
            case Tok::string: {
                const int line = t.line;
                while (at(Tok::string)) next();
                return make(Expr::Kind::constant, line);
            }
            case Tok::op: {
                if (t.text == "...") {
                    next();
                    return make(Expr::Kind::constant, t.line);
                }
                if (t.text == "(") return paren();
                if (t.text == "[") return bracket();
                if (t.text == "{") return brace();
                break;
            }
            default: break;
        }
        fail("unexpected token '" + t.text + "'");
    }

    ExprPtr paren() {
        const int line = peek().line;
        expect_op("(");
        auto node = make(Expr::Kind::other, line);
        if (accept_op(")")) return node;
        if (at_kw("yield")) {
            node->children.push_back(yield_expr());
            expect_op(")");
            return node;
        }
        auto first = star_or_named();
        if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
            node->children.push_back(std::move(first));
            comprehension_tail(*node);
            expect_op(")");
            return node;
        }
        if (!at_op(",")) {
            expect_op(")");
            return first;  // parenthesized expression keeps its own shape
        }
        node->children.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op(")")) break;
            node->children.push_back(star_or_named());
        }
        expect_op(")");
        return node;
    }

    ExprPtr bracket() {
        auto node = make(Expr::Kind::other, peek().line);
        expect_op("[");
        if (accept_op("]")) return node;
        node->children.push_back(star_or_named());
        if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
            comprehension_tail(*node);
        } else {
            while (accept_op(",")) {
                if (at_op("]")) break;
                node->children.push_back(star_or_named());
            }
        }
        expect_op("]");
        return node;
    }

    ExprPtr brace() {
        auto node = make(Expr::Kind::other, peek().line);
        expect_op("{");
        if (accept_op("}")) return node;
        auto item = [&]() {
            if (accept_op("**")) {
                node->children.push_back(bit_or());
                return;
            }
            node->children.push_back(star_or_named());
            if (accept_op(":")) node->children.push_back(test());
        };
        item();
        if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
            comprehension_tail(*node);
        } else {
            while (accept_op(",")) {
                if (at_op("}")) break;
                item();
            }
        }
        expect_op("}");
        return node;
    }

    std::string_view src_;
    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

}  // namespace

Module parse_module(std::string_view source, std::string_view filename) {
    // Skip a UTF-8 byte order mark.
    if (source.substr(0, 3) == "\xEF\xBB\xBF") source.remove_prefix(3);
    try {
        Parser parser(source, Tokenizer(source).run());
        return parser.parse();
    } catch (const SyntaxError& e) {
        throw ParseFailure(std::string(filename) + ":" + std::to_string(e.line) + ": " + e.message);
    }
}

}  // namespace reqsolve::py
