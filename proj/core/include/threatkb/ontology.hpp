#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "threatkb/error.hpp"

namespace threatkb {

enum class Cardinality { Single, Multi };

/// One controlled-vocabulary entry of an ontology class.
struct Term {
    std::string name;
    std::string description;

    bool operator==(const Term&) const = default;
};

struct ClassDef {
    std::string name;
    std::optional<std::string> parent;
    /// Vocabulary order is significant: for ordered classes the index of a
    /// term is its severity rank.
    std::vector<Term> vocabulary;
    std::set<std::string> disjoint_with;
    Cardinality cardinality = Cardinality::Multi;
    bool ordered = false;

    bool has_term(std::string_view term) const;
    bool operator==(const ClassDef&) const = default;
};

/// A class hierarchy with per-class controlled vocabularies. Classes form a
/// forest; every vocabulary term belongs to exactly one class. Instances are
/// immutable once built, so concurrent readers need no synchronization.
class Ontology {
public:
    /// Adds a class, checking name uniqueness, parent existence, and global
    /// term uniqueness. Throws Error on violation.
    void add_class(ClassDef def);

    /// Appends terms to an existing class; rejects duplicates anywhere in
    /// the ontology.
    void add_terms(const std::string& class_name, const std::vector<Term>& terms);

    const ClassDef* find_class(std::string_view name) const;
    const std::vector<ClassDef>& classes() const { return classes_; }
    const std::set<std::string>& roots() const { return roots_; }

    /// Name of the class whose own vocabulary holds `term`, if any.
    std::optional<std::string> owner_of(std::string_view term) const;

    std::vector<std::string> children_of(std::string_view name) const;

    bool operator==(const Ontology&) const = default;

private:
    std::vector<ClassDef> classes_; // insertion order
    std::set<std::string> roots_;
};

/// The built-in security-attack ontology: attack mode/method/consequence and
/// motivation taxonomies plus the six adversary-profile factor classes.
/// Deterministic: repeated calls return structurally identical values.
Ontology builtin_ontology();

/// True iff `term` is in `class_name`'s vocabulary or in any descendant
/// class's vocabulary. Throws Error{UnknownClass} for an unknown class.
bool is_term(const Ontology& o, std::string_view class_name, std::string_view term);

/// Owning class of `term` followed by its transitive ancestors, most
/// specific first. Empty when the term is unknown.
std::vector<std::string> classify_term(const Ontology& o, std::string_view term);

/// Zero-based index of `term` in the rank-ordered vocabulary of
/// `class_name`. Throws UnknownClass, UnorderedClass, or UnknownTerm.
int severity_rank(const Ontology& o, std::string_view class_name, std::string_view term);

/// Parses a line-oriented ontology-extension source and merges it into a
/// copy of `base`. Syntax:
///
///   class <Name> [extends <Parent>] [single|multi] [ordered]
///     term <name> "<description>"
///
/// `#` starts a comment. Reopening an existing class (a bare `class <Name>`
/// line) appends terms to it. Throws Error with a line-numbered message on
/// syntax or merge problems.
Ontology extend_ontology(const Ontology& base, std::string_view source);

} // namespace threatkb
