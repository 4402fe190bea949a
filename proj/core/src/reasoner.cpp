#include "threatkb/reasoner.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace threatkb {

bool Atom::ground() const {
    return std::none_of(args.begin(), args.end(), [](const Arg& a) {
        return a.kind == Arg::Kind::Variable;
    });
}

std::string provenance_label(const Provenance& p) {
    switch (p.kind) {
        case Provenance::Kind::Asserted: return "asserted";
        case Provenance::Kind::Translated: return "translated";
        case Provenance::Kind::Inferred:
            return "inferred(" + std::to_string(p.rule_index) + ")";
        case Provenance::Kind::Classified: return "classified";
    }
    return "?";
}

bool FactBase::add(Atom fact, Provenance p) {
    if (!fact.ground())
        throw Error(ErrorCode::UnsafeRule,
                    "cannot store a fact with variables: " + to_string(fact));
    return facts_.emplace(std::move(fact), p).second;
}

namespace {

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\\\"";
        else if (c == '\\') out += "\\\\";
        else if (c == '\n') out += "\\n";
        else out += c;
    }
    out += '"';
    return out;
}

std::string render(const Arg& a) {
    switch (a.kind) {
        case Arg::Kind::Variable: return "?" + a.value;
        case Arg::Kind::Constant: return a.value;
        case Arg::Kind::Text: return quote(a.value);
    }
    return a.value;
}

} // namespace

std::string to_string(const Atom& a) {
    std::string out = a.predicate + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) out += ", ";
        out += render(a.args[i]);
    }
    out += ")";
    return out;
}

std::string to_string(const Rule& r) {
    std::string out;
    for (std::size_t i = 0; i < r.body.size(); ++i) {
        if (i) out += " ^ ";
        out += to_string(r.body[i]);
    }
    out += " -> ";
    for (std::size_t i = 0; i < r.head.size(); ++i) {
        if (i) out += " ^ ";
        out += to_string(r.head[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Translation.
// ---------------------------------------------------------------------------

namespace {

// Topmost non-operator nodes inside the subtree rooted at `id`.
void collect_roots(const AttackTree& t, const std::string& id,
                   std::vector<std::string>& out) {
    const Node* n = t.find(id);
    if (!n) return;
    if (n->kind != NodeKind::Operator) {
        out.push_back(id);
        return;
    }
    for (const std::string& kid : n->children) collect_roots(t, kid, out);
}

} // namespace

FactBase translate(const AttackTree& t, const Ontology&) {
    FactBase fb;
    const Provenance prov{Provenance::Kind::Translated, -1};

    std::map<std::string, std::string> parent;
    for (const auto& [id, n] : t.nodes)
        for (const std::string& kid : n.children) parent[kid] = id;

    auto spliced_parent = [&](const std::string& id) -> std::string {
        auto it = parent.find(id);
        while (it != parent.end()) {
            const Node* p = t.find(it->second);
            if (!p || p->kind != NodeKind::Operator) return it->second;
            it = parent.find(it->second);
        }
        return "";
    };

    for (const auto& [id, n] : t.nodes) {
        if (n.kind == NodeKind::Operator) {
            fb.add({"operator",
                    {Arg::constant(id),
                     Arg::constant(operator_kind_name(n.op.value_or(OperatorKind::And)))}},
                   prov);
            for (std::size_t i = 0; i < n.children.size(); ++i)
                fb.add({"operand",
                        {Arg::constant(id), Arg::constant(n.children[i]),
                         Arg::constant(std::to_string(i + 1))}},
                       prov);
            // Precedence between consecutive stages of a temporal operator.
            if (n.op == OperatorKind::Sequence || n.op == OperatorKind::Before ||
                n.op == OperatorKind::After) {
                std::vector<std::string> stages = n.children;
                if (n.op == OperatorKind::After)
                    std::reverse(stages.begin(), stages.end());
                for (std::size_t i = 0; i + 1 < stages.size(); ++i) {
                    std::vector<std::string> from, to;
                    collect_roots(t, stages[i], from);
                    collect_roots(t, stages[i + 1], to);
                    for (const std::string& a : from)
                        for (const std::string& b : to)
                            fb.add({"hasSequence",
                                    {Arg::constant(a), Arg::constant(b)}},
                                   prov);
                }
            }
            continue;
        }

        const char* kind = n.kind == NodeKind::Objective ? "objective"
                           : n.kind == NodeKind::Goal    ? "goal"
                                                         : "attack";
        fb.add({kind, {Arg::constant(id)}}, prov);
        fb.add({"description", {Arg::constant(id), Arg::text(n.text)}}, prov);
        std::string p = spliced_parent(id);
        if (!p.empty()) fb.add({"child", {Arg::constant(p), Arg::constant(id)}}, prov);
        for (const Annotation& a : n.annotations)
            fb.add({"has" + a.class_name,
                    {Arg::constant(id), Arg::constant(a.term)}},
                   prov);
    }
    return fb;
}

// ---------------------------------------------------------------------------
// Forward chaining and queries.
// ---------------------------------------------------------------------------

namespace {

using Binding = std::map<std::string, Arg>;
using PredicateIndex = std::map<std::string, std::vector<Atom>>;

void match_atoms(const std::vector<Atom>& pattern, std::size_t i, Binding& binding,
                 const PredicateIndex& index, std::vector<Binding>& out) {
    if (i == pattern.size()) {
        out.push_back(binding);
        return;
    }
    const Atom& pat = pattern[i];
    auto it = index.find(pat.predicate);
    if (it == index.end()) return;
    for (const Atom& fact : it->second) {
        if (fact.args.size() != pat.args.size()) continue;
        std::vector<std::string> bound_here;
        bool ok = true;
        for (std::size_t j = 0; j < pat.args.size(); ++j) {
            const Arg& pa = pat.args[j];
            const Arg& fa = fact.args[j];
            if (pa.kind == Arg::Kind::Variable) {
                auto b = binding.find(pa.value);
                if (b == binding.end()) {
                    binding.emplace(pa.value, fa);
                    bound_here.push_back(pa.value);
                } else if (!(b->second == fa)) {
                    ok = false;
                    break;
                }
            } else if (!(pa == fa)) {
                ok = false;
                break;
            }
        }
        if (ok) match_atoms(pattern, i + 1, binding, index, out);
        for (const std::string& v : bound_here) binding.erase(v);
    }
}

std::vector<Binding> match_all(const std::vector<Atom>& pattern,
                               const PredicateIndex& index) {
    std::vector<Binding> out;
    Binding binding;
    match_atoms(pattern, 0, binding, index, out);
    return out;
}

Atom instantiate(const Atom& pattern, const Binding& binding) {
    Atom out;
    out.predicate = pattern.predicate;
    out.args.reserve(pattern.args.size());
    for (const Arg& a : pattern.args) {
        if (a.kind == Arg::Kind::Variable) {
            out.args.push_back(binding.at(a.value));
        } else {
            out.args.push_back(a);
        }
    }
    return out;
}

void check_safety(const std::vector<Rule>& rules) {
    for (std::size_t k = 0; k < rules.size(); ++k) {
        const Rule& r = rules[k];
        if (r.body.empty() || r.head.empty())
            throw Error(ErrorCode::UnsafeRule,
                        "rule " + std::to_string(k + 1) +
                            " must have a nonempty body and head");
        std::set<std::string> body_vars;
        for (const Atom& a : r.body)
            for (const Arg& arg : a.args)
                if (arg.kind == Arg::Kind::Variable) body_vars.insert(arg.value);
        for (const Atom& a : r.head)
            for (const Arg& arg : a.args)
                if (arg.kind == Arg::Kind::Variable && !body_vars.count(arg.value))
                    throw Error(ErrorCode::UnsafeRule,
                                "variable ?" + arg.value + " in the head of rule " +
                                    std::to_string(k + 1) +
                                    " does not occur in its body");
    }
}

PredicateIndex build_index(const FactBase& fb) {
    PredicateIndex index;
    for (const auto& [atom, prov] : fb.facts()) index[atom.predicate].push_back(atom);
    return index;
}

} // namespace

FactBase apply_rules(const FactBase& fb, const std::vector<Rule>& rules) {
    check_safety(rules);
    FactBase out = fb;
    bool changed = true;
    while (changed) {
        changed = false;
        PredicateIndex index = build_index(out);
        for (std::size_t k = 0; k < rules.size(); ++k) {
            for (const Binding& binding : match_all(rules[k].body, index)) {
                for (const Atom& head : rules[k].head) {
                    Atom fact = instantiate(head, binding);
                    if (!out.contains(fact)) {
                        out.add(std::move(fact),
                                {Provenance::Kind::Inferred, static_cast<int>(k)});
                        changed = true;
                    }
                }
            }
        }
    }
    return out;
}

std::vector<BindingsRow> query(const FactBase& fb, const Query& q) {
    if (q.where.empty())
        throw Error(ErrorCode::MalformedQuery, "the where clause must not be empty");
    if (q.select_vars.empty())
        throw Error(ErrorCode::MalformedQuery, "select at least one variable");
    std::set<std::string> where_vars;
    for (const Atom& a : q.where)
        for (const Arg& arg : a.args)
            if (arg.kind == Arg::Kind::Variable) where_vars.insert(arg.value);
    for (const std::string& v : q.select_vars)
        if (!where_vars.count(v))
            throw Error(ErrorCode::MalformedQuery,
                        "selected variable ?" + v + " does not occur in the where clause");

    PredicateIndex index = build_index(fb);
    std::set<BindingsRow> rows;
    for (const Binding& binding : match_all(q.where, index)) {
        BindingsRow row;
        row.reserve(q.select_vars.size());
        for (const std::string& v : q.select_vars) row.push_back(binding.at(v).value);
        rows.insert(std::move(row));
    }
    return {rows.begin(), rows.end()};
}

// ---------------------------------------------------------------------------
// Reasoning services.
// ---------------------------------------------------------------------------

namespace {

// Ontology class behind a has<Class> predicate, or null for free predicates.
const ClassDef* annotation_class(const Ontology& o, const std::string& predicate) {
    if (predicate.size() <= 3 || predicate.rfind("has", 0) != 0) return nullptr;
    return o.find_class(predicate.substr(3));
}

bool is_reserved_predicate(const std::string& predicate) {
    return predicate == "hasSequence" || predicate == "hasFunction" ||
           predicate == "hasAvoidGoal";
}

} // namespace

ValidationReport check_consistency(const FactBase& fb, const Ontology& o) {
    std::set<std::string> typed_subjects;
    for (const auto& [atom, prov] : fb.facts())
        if (atom.args.size() == 1 &&
            (atom.predicate == "objective" || atom.predicate == "goal" ||
             atom.predicate == "attack"))
            typed_subjects.insert(atom.args[0].value);

    ValidationReport per_fact;
    std::map<std::pair<std::string, std::string>, std::set<std::string>> single_use;
    for (const auto& [atom, prov] : fb.facts()) {
        const ClassDef* def = annotation_class(o, atom.predicate);
        if (!def) continue;
        if (atom.args.size() != 2) {
            per_fact.push_back(
                {Severity::Error, "BAD_ARITY",
                 atom.args.empty() ? "" : atom.args[0].value,
                 to_string(atom) + ": a " + atom.predicate + " fact takes exactly " +
                     "2 arguments"});
            continue;
        }
        const std::string& subject = atom.args[0].value;
        const std::string& term = atom.args[1].value;
        if (!is_term(o, def->name, term))
            per_fact.push_back({Severity::Error, "VOCABULARY", subject,
                                "term '" + term + "' in " + to_string(atom) +
                                    " is not in the vocabulary of class '" +
                                    def->name + "'"});
        if (!typed_subjects.count(subject))
            per_fact.push_back({Severity::Error, "MISSING_KIND", subject,
                                "subject of " + to_string(atom) +
                                    " has no objective/goal/attack fact"});
        if (def->cardinality == Cardinality::Single)
            single_use[{def->name, subject}].insert(term);
    }

    ValidationReport report;
    for (const auto& [key, terms] : single_use) {
        if (terms.size() < 2) continue;
        std::string list;
        for (const std::string& t : terms) {
            if (!list.empty()) list += ", ";
            list += t;
        }
        report.push_back({Severity::Error, "CARDINALITY", key.second,
                          "class '" + key.first + "' is single-valued but '" +
                              key.second + "' carries " +
                              std::to_string(terms.size()) + " terms: " + list});
    }
    report.insert(report.end(), per_fact.begin(), per_fact.end());
    return report;
}

ValidationReport check_satisfiability(const std::vector<Atom>& atoms,
                                      const Ontology& o) {
    ValidationReport report;
    std::map<std::pair<std::string, std::string>, std::set<std::string>> demanded;
    for (const Atom& atom : atoms) {
        if (atom.predicate.size() <= 3 || atom.predicate.rfind("has", 0) != 0)
            continue;
        if (is_reserved_predicate(atom.predicate)) continue;
        const ClassDef* def = o.find_class(atom.predicate.substr(3));
        if (!def) {
            report.push_back({Severity::Error, "UNKNOWN_PREDICATE", atom.predicate,
                              "predicate '" + atom.predicate +
                                  "' matches no ontology class"});
            continue;
        }
        if (atom.args.size() != 2) {
            report.push_back({Severity::Error, "BAD_ARITY",
                              atom.args.empty() ? "" : render(atom.args[0]),
                              to_string(atom) + ": a " + atom.predicate +
                                  " atom takes exactly 2 arguments"});
            continue;
        }
        const Arg& term = atom.args[1];
        if (term.kind != Arg::Kind::Variable) {
            if (!is_term(o, def->name, term.value)) {
                report.push_back({Severity::Error, "TERM_NOT_IN_CLASS",
                                  render(atom.args[0]),
                                  "term '" + term.value + "' in " + to_string(atom) +
                                      " is not in the vocabulary of class '" +
                                      def->name + "'"});
                continue;
            }
            if (def->cardinality == Cardinality::Single)
                demanded[{def->name, render(atom.args[0])}].insert(term.value);
        }
    }
    for (const auto& [key, terms] : demanded) {
        if (terms.size() < 2) continue;
        std::string list;
        for (const std::string& t : terms) {
            if (!list.empty()) list += ", ";
            list += t;
        }
        report.push_back({Severity::Error, "UNSATISFIABLE_CARDINALITY", key.second,
                          "no subject can carry " + std::to_string(terms.size()) +
                              " '" + key.first + "' terms at once: " + list});
    }
    return report;
}

FactBase classify(const FactBase& fb, const Ontology& o) {
    FactBase out = fb;
    for (const auto& [atom, prov] : fb.facts()) {
        const ClassDef* def = annotation_class(o, atom.predicate);
        if (!def || atom.args.size() != 2) continue;
        const ClassDef* cur = def;
        while (cur->parent) {
            const ClassDef* up = o.find_class(*cur->parent);
            if (!up) break;
            Atom lifted{"has" + up->name, atom.args};
            if (!out.contains(lifted))
                out.add(std::move(lifted), {Provenance::Kind::Classified, -1});
            cur = up;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rule and query text.
// ---------------------------------------------------------------------------

namespace {

struct RuleToken {
    enum Kind { Ident, Var, Num, Str, LParen, RParen, Comma, Caret, Arrow, End };
    Kind kind = End;
    std::string text;
};

[[noreturn]] void syntax_error(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

std::vector<RuleToken> tokenize_atoms(std::string_view s, ErrorCode code) {
    std::vector<RuleToken> out;
    std::size_t i = 0;
    auto ident_start = [](char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    };
    auto ident_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        if (c == '#') break; // comment runs to end of line
        if (c == '(') { out.push_back({RuleToken::LParen, "("}); ++i; continue; }
        if (c == ')') { out.push_back({RuleToken::RParen, ")"}); ++i; continue; }
        if (c == ',') { out.push_back({RuleToken::Comma, ","}); ++i; continue; }
        if (c == '^') { out.push_back({RuleToken::Caret, "^"}); ++i; continue; }
        if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
            out.push_back({RuleToken::Arrow, "->"});
            i += 2;
            continue;
        }
        if (c == '?') {
            ++i;
            std::string name;
            while (i < s.size() && ident_char(s[i])) name += s[i++];
            if (name.empty())
                syntax_error(code, "'?' must be followed by a variable name");
            out.push_back({RuleToken::Var, std::move(name)});
            continue;
        }
        if (ident_start(c)) {
            std::string name;
            while (i < s.size() && ident_char(s[i])) name += s[i++];
            out.push_back({RuleToken::Ident, std::move(name)});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
                num += s[i++];
            out.push_back({RuleToken::Num, std::move(num)});
            continue;
        }
        if (c == '"') {
            ++i;
            std::string value;
            bool closed = false;
            while (i < s.size()) {
                char d = s[i];
                if (d == '"') { closed = true; ++i; break; }
                if (d == '\\' && i + 1 < s.size()) {
                    char e = s[i + 1];
                    if (e == '"') value += '"';
                    else if (e == '\\') value += '\\';
                    else if (e == 'n') value += '\n';
                    else syntax_error(code, std::string("unsupported escape '\\") + e + "'");
                    i += 2;
                    continue;
                }
                value += d;
                ++i;
            }
            if (!closed) syntax_error(code, "string is not terminated");
            out.push_back({RuleToken::Str, std::move(value)});
            continue;
        }
        syntax_error(code, std::string("unexpected character '") + c + "'");
    }
    out.push_back({RuleToken::End, ""});
    return out;
}

class AtomParser {
public:
    AtomParser(const std::vector<RuleToken>& toks, ErrorCode code)
        : toks_(toks), code_(code) {}

    const RuleToken& peek() const { return toks_[pos_]; }
    const RuleToken& get() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool at_end() const { return peek().kind == RuleToken::End; }

    Atom parse_atom() {
        if (peek().kind != RuleToken::Ident)
            syntax_error(code_, "expected a predicate name");
        Atom atom;
        atom.predicate = get().text;
        if (get().kind != RuleToken::LParen)
            syntax_error(code_, "expected '(' after predicate '" + atom.predicate + "'");
        while (true) {
            const RuleToken& tok = get();
            switch (tok.kind) {
                case RuleToken::Var: atom.args.push_back(Arg::variable(tok.text)); break;
                case RuleToken::Ident:
                case RuleToken::Num: atom.args.push_back(Arg::constant(tok.text)); break;
                case RuleToken::Str: atom.args.push_back(Arg::text(tok.text)); break;
                default:
                    syntax_error(code_, "expected an argument in '" + atom.predicate +
                                            "(...)'");
            }
            const RuleToken& sep = get();
            if (sep.kind == RuleToken::Comma) continue;
            if (sep.kind == RuleToken::RParen) break;
            syntax_error(code_, "expected ',' or ')' in '" + atom.predicate + "(...)'");
        }
        return atom;
    }

    std::vector<Atom> parse_conjunction() {
        std::vector<Atom> atoms{parse_atom()};
        while (peek().kind == RuleToken::Caret) {
            get();
            atoms.push_back(parse_atom());
        }
        return atoms;
    }

private:
    const std::vector<RuleToken>& toks_;
    std::size_t pos_ = 0;
    ErrorCode code_;
};

} // namespace

Rule parse_rule(std::string_view line) {
    auto toks = tokenize_atoms(line, ErrorCode::RuleSyntax);
    AtomParser p(toks, ErrorCode::RuleSyntax);
    if (p.at_end()) syntax_error(ErrorCode::RuleSyntax, "empty rule");
    Rule rule;
    rule.body = p.parse_conjunction();
    if (p.get().kind != RuleToken::Arrow)
        syntax_error(ErrorCode::RuleSyntax, "expected '->' between body and head");
    rule.head = p.parse_conjunction();
    if (!p.at_end())
        syntax_error(ErrorCode::RuleSyntax, "unexpected input after the rule head");
    return rule;
}

std::vector<Rule> parse_rules(std::string_view text) {
    std::vector<Rule> rules;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        // Skip blank and comment-only lines without invoking the parser.
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos || line[first] == '#') continue;

        try {
            rules.push_back(parse_rule(line));
        } catch (const Error& e) {
            throw Error(ErrorCode::RuleSyntax,
                        "rule line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rules;
}

Query parse_query(std::string_view text) {
    auto toks = tokenize_atoms(text, ErrorCode::MalformedQuery);
    AtomParser p(toks, ErrorCode::MalformedQuery);
    if (p.peek().kind != RuleToken::Ident || p.peek().text != "select")
        syntax_error(ErrorCode::MalformedQuery, "a query starts with 'select'");
    p.get();

    Query q;
    while (true) {
        if (p.peek().kind != RuleToken::Var)
            syntax_error(ErrorCode::MalformedQuery,
                         "expected a ?variable after 'select'");
        q.select_vars.push_back(p.get().text);
        if (p.peek().kind == RuleToken::Comma) {
            p.get();
            continue;
        }
        break;
    }
    if (p.peek().kind != RuleToken::Ident || p.peek().text != "where")
        syntax_error(ErrorCode::MalformedQuery, "expected 'where' after the select list");
    p.get();
    q.where = p.parse_conjunction();
    if (!p.at_end())
        syntax_error(ErrorCode::MalformedQuery, "unexpected input after the where clause");

    std::set<std::string> where_vars;
    for (const Atom& a : q.where)
        for (const Arg& arg : a.args)
            if (arg.kind == Arg::Kind::Variable) where_vars.insert(arg.value);
    for (const std::string& v : q.select_vars)
        if (!where_vars.count(v))
            syntax_error(ErrorCode::MalformedQuery,
                         "selected variable ?" + v + " does not occur in the where clause");
    return q;
}

} // namespace threatkb
