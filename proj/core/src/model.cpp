#include "threatkb/model.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace threatkb {

const char* node_kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Objective: return "objective";
        case NodeKind::Goal: return "goal";
        case NodeKind::Operator: return "operator";
        case NodeKind::Attack: return "attack";
    }
    return "?";
}

const char* operator_kind_name(OperatorKind k) {
    switch (k) {
        case OperatorKind::And: return "and";
        case OperatorKind::Or: return "or";
        case OperatorKind::Sequence: return "sequence";
        case OperatorKind::Before: return "before";
        case OperatorKind::After: return "after";
    }
    return "?";
}

const Node* AttackTree::find(std::string_view id) const {
    auto it = nodes.find(std::string(id));
    return it == nodes.end() ? nullptr : &it->second;
}

namespace {

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

void add(ValidationReport& r, const std::string& code, const std::string& node,
         std::string message) {
    r.push_back({Severity::Error, code, node, std::move(message)});
}

} // namespace

ValidationReport structure_findings(const AttackTree& t) {
    ValidationReport r;

    if (t.name.empty()) add(r, "EMPTY_NAME", "", "the tree has no name");

    if (t.root.empty() || t.nodes.find(t.root) == t.nodes.end()) {
        add(r, "ROOT_MISSING", t.root, "root id does not name a node");
    } else if (t.nodes.at(t.root).kind != NodeKind::Objective) {
        add(r, "ROOT_KIND", t.root, "the root must be an objective node");
    }

    // Per-node shape checks, in id order.
    std::map<std::string, std::vector<std::string>> parents; // id -> parent ids
    for (const auto& [id, n] : t.nodes) {
        if (id != n.id)
            add(r, "ID_MISMATCH", id,
                "node is stored under '" + id + "' but carries id '" + n.id + "'");
        if (n.id.empty())
            add(r, "EMPTY_ID", id, "node id is empty");
        else if (!is_identifier(n.id))
            add(r, "BAD_ID", id, "node id '" + n.id + "' is not an identifier");

        if (n.kind == NodeKind::Operator) {
            if (!n.op) {
                add(r, "OPERATOR_MISSING", id, "operator node has no operator kind");
            } else {
                std::size_t arity = n.children.size();
                bool binary = *n.op == OperatorKind::Before || *n.op == OperatorKind::After;
                if (binary ? arity != 2 : arity < 2)
                    add(r, "OPERATOR_ARITY", id,
                        std::string(operator_kind_name(*n.op)) +
                            (binary ? " takes exactly 2 children, got "
                                    : " needs at least 2 children, got ") +
                            std::to_string(arity));
            }
            if (!n.annotations.empty())
                add(r, "ANNOTATION_ON_OPERATOR", id, "operator nodes cannot be annotated");
            if (!n.text.empty())
                add(r, "OPERATOR_TEXT", id, "operator nodes carry no description text");
        } else {
            if (n.op)
                add(r, "OPERATOR_UNEXPECTED", id,
                    std::string(node_kind_name(n.kind)) + " node carries an operator kind");
            if (n.text.empty())
                add(r, "EMPTY_TEXT", id,
                    std::string(node_kind_name(n.kind)) + " node has no description text");
        }

        bool missing_child = false;
        for (const std::string& kid : n.children) {
            if (t.nodes.find(kid) == t.nodes.end()) {
                add(r, "EDGE_UNKNOWN_NODE", id, "child '" + kid + "' does not exist");
                missing_child = true;
            } else {
                parents[kid].push_back(id);
            }
        }

        // Kind discipline: what may sit under what, and in which combination.
        if (!missing_child) {
            std::size_t ops = 0, attacks = 0, goals = 0, others = 0;
            for (const std::string& kid : n.children) {
                switch (t.nodes.at(kid).kind) {
                    case NodeKind::Operator: ++ops; break;
                    case NodeKind::Attack: ++attacks; break;
                    case NodeKind::Goal: ++goals; break;
                    default: ++others; break;
                }
            }
            switch (n.kind) {
                case NodeKind::Objective:
                    if (ops || attacks || others)
                        add(r, "KIND_DISCIPLINE", id,
                            "an objective's children must all be goals");
                    break;
                case NodeKind::Goal:
                case NodeKind::Attack:
                    if (goals || others)
                        add(r, "KIND_DISCIPLINE", id,
                            std::string(node_kind_name(n.kind)) +
                                " children must be operators or attacks");
                    else if (ops > 1 || (ops == 1 && attacks > 0))
                        add(r, "MIXED_BODY", id,
                            "a body holds either one operator or only attacks");
                    break;
                case NodeKind::Operator:
                    if (goals || others)
                        add(r, "KIND_DISCIPLINE", id,
                            "operator children must be operators or attacks");
                    break;
            }
        }

        if (n.children.empty() && n.kind != NodeKind::Attack &&
            n.kind != NodeKind::Operator)
            add(r, "LEAF_KIND", id,
                std::string("childless node is a ") + node_kind_name(n.kind) +
                    "; leaves must be attacks");
    }

    for (const auto& [id, ps] : parents) {
        if (ps.size() > 1)
            add(r, "MULTIPLE_PARENTS", id,
                "node has " + std::to_string(ps.size()) + " parents");
        if (id == t.root)
            add(r, "ROOT_HAS_PARENT", id, "the root cannot be a child");
    }

    // Reachability from the root; a cycle shows up as unreachable nodes or
    // as one of the parent findings above.
    std::set<std::string> seen;
    if (t.nodes.find(t.root) != t.nodes.end()) {
        std::vector<std::string> stack{t.root};
        while (!stack.empty()) {
            std::string id = stack.back();
            stack.pop_back();
            if (!seen.insert(id).second) continue;
            auto it = t.nodes.find(id);
            if (it == t.nodes.end()) continue;
            for (const std::string& kid : it->second.children) stack.push_back(kid);
        }
    }
    for (const auto& [id, n] : t.nodes)
        if (seen.find(id) == seen.end())
            add(r, "UNREACHABLE", id, "node is not reachable from the root");

    return r;
}

ValidationReport validate_structure(const AttackTree& t, const Ontology& o) {
    ValidationReport r = structure_findings(t);

    for (const auto& [id, n] : t.nodes) {
        std::map<std::string, std::set<std::string>> per_class;
        for (const Annotation& a : n.annotations) {
            const ClassDef* def = o.find_class(a.class_name);
            if (!def) {
                add(r, "UNKNOWN_CLASS", id,
                    "annotation class '" + a.class_name + "' is not in the ontology");
                continue;
            }
            if (!is_term(o, a.class_name, a.term))
                add(r, "VOCABULARY_MISMATCH", id,
                    "term '" + a.term + "' is not in the vocabulary of class '" +
                        a.class_name + "'");
            per_class[a.class_name].insert(a.term);
        }
        for (const auto& [cls, terms] : per_class) {
            const ClassDef* def = o.find_class(cls);
            std::size_t uses = 0;
            for (const Annotation& a : n.annotations)
                if (a.class_name == cls) ++uses;
            if (def && def->cardinality == Cardinality::Single && uses > 1)
                add(r, "CARDINALITY", id,
                    "class '" + cls + "' is single-valued but is annotated " +
                        std::to_string(uses) + " times");
        }
    }
    return r;
}

AttackTree annotate(const AttackTree& t, const std::string& node, const Annotation& a,
                    const Ontology& o) {
    AttackTree out = t;
    auto it = out.nodes.find(node);
    if (it == out.nodes.end())
        throw Error(ErrorCode::UnknownNode, "no node with id '" + node + "'");
    if (!is_term(o, a.class_name, a.term)) // throws UnknownClass for unknown class
        throw Error(ErrorCode::VocabularyMismatch,
                    "term '" + a.term + "' is not in the vocabulary of class '" +
                        a.class_name + "'");
    const ClassDef* def = o.find_class(a.class_name);
    if (def && def->cardinality == Cardinality::Single)
        for (const Annotation& existing : it->second.annotations)
            if (existing.class_name == a.class_name)
                throw Error(ErrorCode::CardinalityViolation,
                            "node '" + node + "' already carries a '" + a.class_name +
                                "' term and the class is single-valued");
    it->second.annotations.push_back(a);
    return out;
}

std::vector<std::string> leaves(const AttackTree& t) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto walk = [&](auto&& self, const std::string& id) -> void {
        if (!seen.insert(id).second) return;
        auto it = t.nodes.find(id);
        if (it == t.nodes.end()) return;
        if (it->second.children.empty()) {
            out.push_back(id);
            return;
        }
        for (const std::string& kid : it->second.children) self(self, kid);
    };
    if (t.nodes.find(t.root) != t.nodes.end()) walk(walk, t.root);
    return out;
}

namespace {

bool nodes_equal(const AttackTree& a, const std::string& ida, const AttackTree& b,
                 const std::string& idb, std::set<std::string>& visiting) {
    const Node* na = a.find(ida);
    const Node* nb = b.find(idb);
    if (!na || !nb) return !na && !nb && ida == idb;
    if (!visiting.insert(ida).second) return false; // cycle guard
    bool ok = na->kind == nb->kind && na->op == nb->op &&
              na->children.size() == nb->children.size();
    if (ok && na->kind != NodeKind::Operator)
        ok = na->id == nb->id && na->text == nb->text;
    if (ok) {
        auto ann_a = na->annotations;
        auto ann_b = nb->annotations;
        std::sort(ann_a.begin(), ann_a.end());
        std::sort(ann_b.begin(), ann_b.end());
        ok = ann_a == ann_b;
    }
    for (std::size_t i = 0; ok && i < na->children.size(); ++i)
        ok = nodes_equal(a, na->children[i], b, nb->children[i], visiting);
    visiting.erase(ida);
    return ok;
}

} // namespace

bool structurally_equal(const AttackTree& a, const AttackTree& b) {
    if (a.name != b.name) return false;
    std::set<std::string> visiting;
    return nodes_equal(a, a.root, b, b.root, visiting);
}

} // namespace threatkb
