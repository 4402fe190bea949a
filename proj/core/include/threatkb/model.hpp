#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "threatkb/error.hpp"
#include "threatkb/ontology.hpp"

namespace threatkb {

enum class NodeKind { Objective, Goal, Operator, Attack };

enum class OperatorKind { And, Or, Sequence, Before, After };

const char* node_kind_name(NodeKind k);     // "objective", "goal", ...
const char* operator_kind_name(OperatorKind k); // "and", "or", "sequence", ...

/// Attaches one controlled-vocabulary term to a node, keyed by the ontology
/// class the term must belong to.
struct Annotation {
    std::string class_name;
    std::string term;

    bool operator==(const Annotation&) const = default;
    auto operator<=>(const Annotation&) const = default;
};

struct Node {
    std::string id;
    NodeKind kind = NodeKind::Attack;
    /// Free-text description; empty for operator nodes.
    std::string text;
    /// Present iff kind == Operator.
    std::optional<OperatorKind> op;
    std::vector<Annotation> annotations;
    /// Ordered child ids. Order is significant for SEQUENCE/BEFORE/AFTER
    /// and preserved everywhere else.
    std::vector<std::string> children;

    bool operator==(const Node&) const = default;
};

/// A rooted attack tree: one objective root, goal children, then operator
/// and attack nodes. Values are plain data; completed trees are treated as
/// immutable and are safe to share across threads.
struct AttackTree {
    std::string name;
    std::string root;
    std::map<std::string, Node> nodes;

    const Node* find(std::string_view id) const;

    bool operator==(const AttackTree&) const = default;
};

using ValidationReport = std::vector<Finding>;

/// Shape-only checks: one objective root, single parenthood, reachability,
/// operator arity and placement, kind discipline per level, nonempty
/// ids/texts. Needs no ontology. Empty report = structurally sound.
ValidationReport structure_findings(const AttackTree& t);

/// Full validation: structure findings plus annotation checks against `o`
/// (known class, term in vocabulary, single-cardinality classes annotated
/// at most once per node). Problems are findings, never exceptions.
ValidationReport validate_structure(const AttackTree& t, const Ontology& o);

/// Returns a copy of `t` with `a` appended to `node`'s annotations.
/// Throws UnknownNode, VocabularyMismatch (term outside the class's
/// vocabulary), or CardinalityViolation (second term of a single class);
/// an unknown annotation class propagates as UnknownClass.
AttackTree annotate(const AttackTree& t, const std::string& node, const Annotation& a,
                    const Ontology& o);

/// Ids of childless nodes in depth-first, left-to-right order.
std::vector<std::string> leaves(const AttackTree& t);

/// Equality up to operator-node ids: operator ids are synthesized by the
/// parser, so two trees that differ only in them describe the same model.
/// Annotation lists are compared as sorted multisets.
bool structurally_equal(const AttackTree& a, const AttackTree& b);

} // namespace threatkb
