#pragma once

#include <compare>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "threatkb/model.hpp"
#include "threatkb/ontology.hpp"

namespace threatkb {

/// One argument of an atom. Constants are bare identifiers or numerals;
/// Text holds an arbitrary string (rendered quoted); Variables only appear
/// in rules and queries, never in stored facts.
struct Arg {
    enum class Kind { Constant, Variable, Text };

    Kind kind = Kind::Constant;
    std::string value; // variable name is stored without its '?' prefix

    static Arg constant(std::string v) { return {Kind::Constant, std::move(v)}; }
    static Arg variable(std::string v) { return {Kind::Variable, std::move(v)}; }
    static Arg text(std::string v) { return {Kind::Text, std::move(v)}; }

    bool operator==(const Arg&) const = default;
    auto operator<=>(const Arg&) const = default;
};

struct Atom {
    std::string predicate;
    std::vector<Arg> args;

    bool ground() const;

    bool operator==(const Atom&) const = default;
    auto operator<=>(const Atom&) const = default;
};

/// atom ^ atom -> atom ^ atom. Safety: every head variable must occur in
/// the body, so matched heads are always ground.
struct Rule {
    std::vector<Atom> body;
    std::vector<Atom> head;

    bool operator==(const Rule&) const = default;
};

struct Query {
    std::vector<std::string> select_vars; // without '?' prefix
    std::vector<Atom> where;

    bool operator==(const Query&) const = default;
};

struct Provenance {
    enum class Kind { Asserted, Translated, Inferred, Classified };

    Kind kind = Kind::Asserted;
    int rule_index = -1; // meaningful for Inferred only

    bool operator==(const Provenance&) const = default;
};

std::string provenance_label(const Provenance& p); // "asserted", "inferred(2)", ...

/// A set of ground atoms with per-fact provenance. Iteration order is the
/// atoms' lexicographic order, which keeps every downstream rendering
/// deterministic.
class FactBase {
public:
    /// Inserts a ground fact; returns false (and keeps the original
    /// provenance) when already present. Throws Error{UnsafeRule} when the
    /// atom still contains variables.
    bool add(Atom fact, Provenance p);

    bool contains(const Atom& fact) const { return facts_.count(fact) != 0; }
    std::size_t size() const { return facts_.size(); }
    const std::map<Atom, Provenance>& facts() const { return facts_; }

    bool operator==(const FactBase& other) const { return facts_ == other.facts_; }

private:
    std::map<Atom, Provenance> facts_;
};

/// Renders an atom as `pred(arg1,arg2)` with Text args double-quoted
/// (escaping \" \\ and newline) and variables as `?name`.
std::string to_string(const Atom& a);
std::string to_string(const Rule& r);

/// Flattens a validated tree into facts: kind facts objective/goal/attack,
/// child edges with operator nodes spliced out, operator/operand facts for
/// the operators themselves, hasSequence pairs for temporal operators,
/// has<Class> facts for annotations, and description texts. Deterministic.
FactBase translate(const AttackTree& t, const Ontology& o);

/// Least fixpoint of naive forward chaining: apply every rule against all
/// current facts until nothing new appears. New facts carry
/// inferred(rule index). Throws Error{UnsafeRule} for a head variable
/// missing from the body.
FactBase apply_rules(const FactBase& fb, const std::vector<Rule>& rules);

using BindingsRow = std::vector<std::string>;

/// All substitutions satisfying every `where` atom, projected onto
/// select_vars, deduplicated and sorted. Throws Error{MalformedQuery} for a
/// select variable absent from `where` or an empty clause.
std::vector<BindingsRow> query(const FactBase& fb, const Query& q);

/// Consistency over a fact base: single-cardinality classes with two terms
/// on one subject (CARDINALITY), has<Class> terms outside the vocabulary
/// (VOCABULARY), has<Class> subjects without a kind fact (MISSING_KIND),
/// has<Class> facts that are not binary (BAD_ARITY). Empty = consistent.
ValidationReport check_consistency(const FactBase& fb, const Ontology& o);

/// Satisfiability of a rule body or query clause: atoms that can never
/// match any translated base — unknown has<Class> predicate
/// (UNKNOWN_PREDICATE), a constant term outside the class's vocabulary
/// (TERM_NOT_IN_CLASS), one variable required to carry two distinct terms
/// of a single-cardinality class (UNSATISFIABLE_CARDINALITY), or a
/// has<Class> atom that is not binary (BAD_ARITY).
ValidationReport check_satisfiability(const std::vector<Atom>& atoms, const Ontology& o);

/// Lifts every has<Class> fact to the class's ancestors: has<Parent>(s, t)
/// and so on up the hierarchy, provenance `classified`. Idempotent.
FactBase classify(const FactBase& fb, const Ontology& o);

/// Rule-file text: one rule per line, `atom ^ atom -> atom ^ atom`,
/// `#` comments. Throws Error{RuleSyntax} with a line-numbered message.
std::vector<Rule> parse_rules(std::string_view text);
Rule parse_rule(std::string_view line);

/// `select ?x, ?y where atom ^ atom`. Throws Error{MalformedQuery}.
Query parse_query(std::string_view text);

} // namespace threatkb
