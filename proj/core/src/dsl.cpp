#include "threatkb/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace threatkb {

namespace {

enum class Tok { Ident, String, LBrace, RBrace, LBracket, RBracket, At, Equals, Comma, End };

std::string token_desc(Tok t, const std::string& text) {
    switch (t) {
        case Tok::Ident: return "'" + text + "'";
        case Tok::String: return "a string";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::At: return "'@'";
        case Tok::Equals: return "'='";
        case Tok::Comma: return "','";
        case Tok::End: return "end of input";
    }
    return "?";
}

struct Token {
    Tok kind = Tok::End;
    std::string text; // identifier name or decoded string value
    SourceSpan span;
};

constexpr std::size_t kErrorCap = 20;

class Lexer {
public:
    Lexer(std::string_view src, std::vector<ParseError>& errors)
        : src_(src), errors_(errors) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_blank();
            if (pos_ >= src_.size()) break;
            char c = src_[pos_];
            SourceSpan at{line_, col_, 1};
            switch (c) {
                case '{': out.push_back({Tok::LBrace, "{", at}); advance(); continue;
                case '}': out.push_back({Tok::RBrace, "}", at}); advance(); continue;
                case '[': out.push_back({Tok::LBracket, "[", at}); advance(); continue;
                case ']': out.push_back({Tok::RBracket, "]", at}); advance(); continue;
                case '@': out.push_back({Tok::At, "@", at}); advance(); continue;
                case '=': out.push_back({Tok::Equals, "=", at}); advance(); continue;
                case ',': out.push_back({Tok::Comma, ",", at}); advance(); continue;
                case '"': out.push_back(lex_string()); continue;
                default: break;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                out.push_back(lex_ident());
                continue;
            }
            error(at, "UNEXPECTED_CHAR",
                  std::string("unexpected character '") + c + "'");
            advance();
        }
        out.push_back({Tok::End, "", {line_, col_, 1}});
        return out;
    }

private:
    void advance() {
        if (pos_ < src_.size() && src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_blank() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    Token lex_ident() {
        SourceSpan at{line_, col_, 0};
        std::string text;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                src_[pos_] == '_')) {
            text += src_[pos_];
            advance();
        }
        at.length = static_cast<int>(text.size());
        return {Tok::Ident, std::move(text), at};
    }

    Token lex_string() {
        SourceSpan at{line_, col_, 1};
        advance(); // opening quote
        std::string value;
        while (true) {
            if (pos_ >= src_.size() || src_[pos_] == '\n') {
                error(at, "UNTERMINATED_STRING", "string is not terminated");
                break;
            }
            char c = src_[pos_];
            if (c == '"') {
                advance();
                break;
            }
            if (c == '\\') {
                SourceSpan esc{line_, col_, 2};
                advance();
                if (pos_ >= src_.size() || src_[pos_] == '\n') {
                    error(at, "UNTERMINATED_STRING", "string is not terminated");
                    break;
                }
                char e = src_[pos_];
                if (e == '"') value += '"';
                else if (e == '\\') value += '\\';
                else if (e == 'n') value += '\n';
                else {
                    error(esc, "BAD_ESCAPE",
                          std::string("unsupported escape '\\") + e +
                              "' (use \\\" \\\\ or \\n)");
                    value += e;
                }
                advance();
                continue;
            }
            value += c;
            advance();
        }
        at.length = std::max(1, col_ - at.column);
        return {Tok::String, std::move(value), at};
    }

    void error(SourceSpan span, const char* code, std::string message) {
        if (errors_.size() < kErrorCap)
            errors_.push_back({span, code, std::move(message), {}});
    }

    std::string_view src_;
    std::vector<ParseError>& errors_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

bool is_op_keyword(const Token& t) {
    return t.kind == Tok::Ident &&
           (t.text == "and" || t.text == "or" || t.text == "sequence" ||
            t.text == "before" || t.text == "after");
}

bool is_sync_token(const Token& t) {
    if (t.kind == Tok::RBrace || t.kind == Tok::End) return true;
    if (t.kind != Tok::Ident) return false;
    return t.text == "objective" || t.text == "goal" || t.text == "attack" ||
           is_op_keyword(t);
}

class Parser {
public:
    Parser(std::vector<Token> tokens, std::vector<ParseError>& errors)
        : tokens_(std::move(tokens)), errors_(errors) {}

    std::optional<AttackTree> run() {
        AttackTree tree;
        if (!eat_keyword("attacktree")) {
            error_here("UNEXPECTED_TOKEN",
                       "expected 'attacktree' at the start of the file",
                       {"attacktree"});
            return std::nullopt;
        }
        if (auto name = expect(Tok::String, "the tree name")) {
            tree.name = name->text;
            if (tree.name.empty())
                error_at(name->span, "EMPTY_NAME", "the tree name must not be empty");
        }
        expect(Tok::LBrace, "'{'");
        std::string root = parse_objective();
        if (root.empty()) return std::nullopt;
        expect(Tok::RBrace, "'}'");
        if (!capped() && peek().kind != Tok::End)
            error_here("UNEXPECTED_TOKEN", "input continues after the closing brace", {});

        tree.root = root;
        tree.nodes = std::move(nodes_);
        rename_operators(tree);
        return tree;
    }

private:
    // --- token plumbing ---

    const Token& peek() const { return tokens_[pos_]; }
    const Token& get() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

    bool at_keyword(const char* kw) const {
        return peek().kind == Tok::Ident && peek().text == kw;
    }

    bool eat_keyword(const char* kw) {
        if (!at_keyword(kw)) return false;
        get();
        return true;
    }

    std::optional<Token> expect(Tok kind, const char* what) {
        if (peek().kind == kind) return get();
        error_here("UNEXPECTED_TOKEN",
                   std::string("expected ") + what + ", got " +
                       token_desc(peek().kind, peek().text),
                   {what});
        return std::nullopt;
    }

    bool capped() const { return errors_.size() >= kErrorCap; }

    void error_at(SourceSpan span, const char* code, std::string message,
                  std::vector<std::string> expected = {}) {
        if (!capped())
            errors_.push_back({span, code, std::move(message), std::move(expected)});
    }

    void error_here(const char* code, std::string message,
                    std::vector<std::string> expected) {
        error_at(peek().span, code, std::move(message), std::move(expected));
    }

    void sync() {
        while (!is_sync_token(peek())) get();
    }

    // --- node bookkeeping ---

    std::string register_id(const Token& ident) {
        if (used_ids_.insert(ident.text).second) return ident.text;
        error_at(ident.span, "DUPLICATE_ID",
                 "id '" + ident.text + "' is already used by another node");
        return "#dup" + std::to_string(++dup_counter_);
    }

    std::string add_node(std::string id, NodeKind kind, std::string text,
                         std::optional<OperatorKind> op,
                         std::vector<Annotation> annotations,
                         std::vector<std::string> children) {
        Node n;
        n.id = id;
        n.kind = kind;
        n.text = std::move(text);
        n.op = op;
        n.annotations = std::move(annotations);
        n.children = std::move(children);
        nodes_[id] = std::move(n);
        return id;
    }

    // --- grammar ---

    std::string parse_objective() {
        if (!eat_keyword("objective")) {
            error_here("UNEXPECTED_TOKEN", "expected 'objective'", {"objective"});
            sync();
            if (!eat_keyword("objective")) return "";
        }
        auto ident = expect(Tok::Ident, "an objective id");
        if (!ident) {
            sync();
            return "";
        }
        std::string id = register_id(*ident);
        std::string text = parse_text(*ident);
        std::vector<Annotation> anns = parse_ann_block();

        std::vector<std::string> kids;
        if (expect(Tok::LBrace, "'{'")) {
            while (!capped()) {
                if (peek().kind == Tok::RBrace || peek().kind == Tok::End) break;
                if (at_keyword("goal")) {
                    std::string kid = parse_goal();
                    if (!kid.empty()) kids.push_back(kid);
                } else if (at_keyword("attack") || is_op_keyword(peek())) {
                    error_here("UNEXPECTED_TOKEN",
                               "only goals may appear directly under the objective",
                               {"goal"});
                    std::string kid =
                        at_keyword("attack") ? parse_attack() : parse_opnode();
                    if (!kid.empty()) kids.push_back(kid);
                } else {
                    error_here("UNEXPECTED_TOKEN",
                               "expected 'goal', got " +
                                   token_desc(peek().kind, peek().text),
                               {"goal"});
                    sync();
                    if (peek().kind == Tok::RBrace || peek().kind == Tok::End) break;
                    if (!at_keyword("goal") && !at_keyword("attack") &&
                        !is_op_keyword(peek()))
                        get();
                }
            }
            if (kids.empty() && !capped())
                error_here("UNEXPECTED_TOKEN", "the objective needs at least one goal",
                           {"goal"});
            expect(Tok::RBrace, "'}'");
        }
        return add_node(id, NodeKind::Objective, std::move(text), std::nullopt,
                        std::move(anns), std::move(kids));
    }

    std::string parse_goal() {
        get(); // 'goal'
        auto ident = expect(Tok::Ident, "a goal id");
        if (!ident) {
            sync();
            return "";
        }
        std::string id = register_id(*ident);
        std::string text = parse_text(*ident);
        std::vector<Annotation> anns = parse_ann_block();
        std::vector<std::string> kids;
        if (expect(Tok::LBrace, "'{'")) {
            kids = parse_body();
            expect(Tok::RBrace, "'}'");
        }
        return add_node(id, NodeKind::Goal, std::move(text), std::nullopt,
                        std::move(anns), std::move(kids));
    }

    std::string parse_attack() {
        get(); // 'attack'
        auto ident = expect(Tok::Ident, "an attack id");
        if (!ident) {
            sync();
            return "";
        }
        std::string id = register_id(*ident);
        std::string text = parse_text(*ident);
        std::vector<Annotation> anns = parse_ann_block();
        std::vector<std::string> kids;
        if (peek().kind == Tok::LBrace) {
            get();
            kids = parse_body();
            expect(Tok::RBrace, "'}'");
        }
        return add_node(id, NodeKind::Attack, std::move(text), std::nullopt,
                        std::move(anns), std::move(kids));
    }

    // body = one operator node | attack+
    std::vector<std::string> parse_body() {
        std::vector<std::string> kids;
        bool have_operator = false;
        while (!capped()) {
            if (peek().kind == Tok::RBrace || peek().kind == Tok::End) break;
            if (is_op_keyword(peek())) {
                if (!kids.empty())
                    error_here("UNEXPECTED_TOKEN",
                               "a body holds either one operator or a run of attacks",
                               {});
                std::string kid = parse_opnode();
                if (!kid.empty()) kids.push_back(kid);
                have_operator = true;
            } else if (at_keyword("attack")) {
                if (have_operator)
                    error_here("UNEXPECTED_TOKEN",
                               "a body holds either one operator or a run of attacks",
                               {});
                std::string kid = parse_attack();
                if (!kid.empty()) kids.push_back(kid);
            } else {
                error_here("UNEXPECTED_TOKEN",
                           "expected an attack or an operator, got " +
                               token_desc(peek().kind, peek().text),
                           {"attack", "and", "or", "sequence", "before", "after"});
                sync();
                if (peek().kind == Tok::RBrace || peek().kind == Tok::End) break;
                if (!at_keyword("attack") && !is_op_keyword(peek())) get();
            }
        }
        if (kids.empty() && !capped())
            error_here("UNEXPECTED_TOKEN",
                       "a body needs at least one attack or operator", {});
        return kids;
    }

    std::string parse_opnode() {
        Token kw = get();
        OperatorKind op = kw.text == "and"        ? OperatorKind::And
                          : kw.text == "or"       ? OperatorKind::Or
                          : kw.text == "sequence" ? OperatorKind::Sequence
                          : kw.text == "before"   ? OperatorKind::Before
                                                  : OperatorKind::After;
        std::vector<std::string> kids;
        if (expect(Tok::LBrace, "'{'")) {
            while (!capped()) {
                if (peek().kind == Tok::RBrace || peek().kind == Tok::End) break;
                if (at_keyword("attack")) {
                    std::string kid = parse_attack();
                    if (!kid.empty()) kids.push_back(kid);
                } else if (is_op_keyword(peek())) {
                    std::string kid = parse_opnode();
                    if (!kid.empty()) kids.push_back(kid);
                } else {
                    error_here("UNEXPECTED_TOKEN",
                               "expected an attack or an operator, got " +
                                   token_desc(peek().kind, peek().text),
                               {"attack", "and", "or", "sequence", "before", "after"});
                    sync();
                    if (peek().kind == Tok::RBrace || peek().kind == Tok::End) break;
                    if (!at_keyword("attack") && !is_op_keyword(peek())) get();
                }
            }
            expect(Tok::RBrace, "'}'");
        }
        bool binary = op == OperatorKind::Before || op == OperatorKind::After;
        if (!capped() && (binary ? kids.size() != 2 : kids.size() < 2))
            error_at(kw.span, "OPERATOR_ARITY",
                     kw.text + (binary ? " takes exactly 2 children, got "
                                       : " needs at least 2 children, got ") +
                         std::to_string(kids.size()));
        std::string id = "#op" + std::to_string(++op_counter_);
        return add_node(id, NodeKind::Operator, "", op, {}, std::move(kids));
    }

    std::string parse_text(const Token& owner) {
        auto text = expect(Tok::String, "a description string");
        if (!text) return "";
        if (text->text.empty())
            error_at(text->span, "EMPTY_TEXT",
                     "the description of '" + owner.text + "' must not be empty");
        return text->text;
    }

    std::vector<Annotation> parse_ann_block() {
        std::vector<Annotation> anns;
        if (peek().kind != Tok::LBracket) return anns;
        get();
        while (!capped()) {
            if (!expect(Tok::At, "'@'")) {
                skip_to_bracket_end();
                return anns;
            }
            auto cls = expect(Tok::Ident, "an ontology class name");
            if (!cls) {
                skip_to_bracket_end();
                return anns;
            }
            if (!expect(Tok::Equals, "'='")) {
                skip_to_bracket_end();
                return anns;
            }
            auto term = expect(Tok::Ident, "a vocabulary term");
            if (!term) {
                skip_to_bracket_end();
                return anns;
            }
            anns.push_back({cls->text, term->text});
            if (peek().kind == Tok::Comma) {
                get();
                continue;
            }
            if (peek().kind == Tok::RBracket) {
                get();
                return anns;
            }
            error_here("UNEXPECTED_TOKEN",
                       "expected ',' or ']' in the annotation block, got " +
                           token_desc(peek().kind, peek().text),
                       {",", "]"});
            skip_to_bracket_end();
            return anns;
        }
        return anns;
    }

    void skip_to_bracket_end() {
        while (peek().kind != Tok::RBracket && peek().kind != Tok::RBrace &&
               peek().kind != Tok::End)
            get();
        if (peek().kind == Tok::RBracket) get();
    }

    // Gives operator nodes their public ids: op1, op2, ... in depth-first
    // order from the root, skipping ids the author already used. The same
    // structure always gets the same ids, which keeps round-trips stable.
    void rename_operators(AttackTree& tree) {
        std::vector<std::string> order;
        std::set<std::string> seen;
        auto walk = [&](auto&& self, const std::string& id) -> void {
            if (!seen.insert(id).second) return;
            auto it = tree.nodes.find(id);
            if (it == tree.nodes.end()) return;
            if (it->second.kind == NodeKind::Operator) order.push_back(id);
            for (const std::string& kid : it->second.children) self(self, kid);
        };
        walk(walk, tree.root);
        // Orphaned operators (possible after recovery) still get names.
        for (const auto& [id, n] : tree.nodes)
            if (n.kind == NodeKind::Operator && !seen.count(id)) order.push_back(id);

        std::map<std::string, std::string> rename;
        int next = 1;
        for (const std::string& old : order) {
            std::string candidate;
            do {
                candidate = "op" + std::to_string(next++);
            } while (used_ids_.count(candidate));
            used_ids_.insert(candidate);
            rename[old] = candidate;
        }

        std::map<std::string, Node> renamed;
        for (auto& [id, n] : tree.nodes) {
            auto it = rename.find(id);
            std::string new_id = it == rename.end() ? id : it->second;
            n.id = new_id;
            for (std::string& kid : n.children) {
                auto kit = rename.find(kid);
                if (kit != rename.end()) kid = kit->second;
            }
            renamed[new_id] = std::move(n);
        }
        tree.nodes = std::move(renamed);
        if (rename.count(tree.root)) tree.root = rename[tree.root];
    }

    std::vector<Token> tokens_;
    std::vector<ParseError>& errors_;
    std::size_t pos_ = 0;
    std::map<std::string, Node> nodes_;
    std::set<std::string> used_ids_;
    int op_counter_ = 0;
    int dup_counter_ = 0;
};

} // namespace

ParseResult parse(std::string_view text) {
    ParseResult result;
    Lexer lexer(text, result.errors);
    Parser parser(lexer.run(), result.errors);
    result.tree = parser.run();
    return result;
}

namespace {

std::string escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '"') out += "\\\"";
        else if (c == '\\') out += "\\\\";
        else if (c == '\n') out += "\\n";
        else out += c;
    }
    return out;
}

void write_annotations(std::ostringstream& out, const Node& n) {
    if (n.annotations.empty()) return;
    auto sorted = n.annotations;
    std::sort(sorted.begin(), sorted.end());
    out << " [";
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i) out << ", ";
        out << '@' << sorted[i].class_name << " = " << sorted[i].term;
    }
    out << ']';
}

void write_node(std::ostringstream& out, const AttackTree& t, const std::string& id,
                int depth) {
    const Node& n = t.nodes.at(id);
    std::string indent(2 * static_cast<std::size_t>(depth), ' ');
    if (n.kind == NodeKind::Operator) {
        out << indent << operator_kind_name(*n.op) << " {\n";
        for (const std::string& kid : n.children) write_node(out, t, kid, depth + 1);
        out << indent << "}\n";
        return;
    }
    out << indent << node_kind_name(n.kind) << ' ' << n.id << " \"" << escape(n.text)
        << '"';
    write_annotations(out, n);
    if (n.children.empty()) {
        out << '\n';
        return;
    }
    out << " {\n";
    for (const std::string& kid : n.children) write_node(out, t, kid, depth + 1);
    out << indent << "}\n";
}

} // namespace

std::string serialize(const AttackTree& t) {
    ValidationReport findings = structure_findings(t);
    if (!findings.empty()) {
        const Finding& f = findings.front();
        std::string where = f.node.empty() ? "" : " at '" + f.node + "'";
        throw Error(ErrorCode::InvalidTree,
                    "cannot serialize: " + f.code + where + ": " + f.message);
    }
    std::ostringstream out;
    out << "attacktree \"" << escape(t.name) << "\" {\n";
    write_node(out, t, t.root, 1);
    out << "}\n";
    return out.str();
}

} // namespace threatkb
