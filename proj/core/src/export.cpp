#include "threatkb/export.hpp"

#include <algorithm>

namespace threatkb {

std::string export_facts(const FactBase& fb) {
    std::string out;
    for (const auto& [atom, prov] : fb.facts()) {
        out += to_string(atom);
        out += ". # ";
        out += provenance_label(prov);
        out += '\n';
    }
    return out;
}

namespace {

// DOT double-quoted string: escape quotes and backslashes, and turn raw
// newlines into the two-character sequence \n so labels stay on one line.
std::string dot_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"') out += "\\\"";
        else if (c == '\\') out += "\\\\";
        else if (c == '\n') out += "\\n";
        else out += c;
    }
    return out;
}

void preorder(const AttackTree& t, const std::string& id,
              std::vector<std::string>& order) {
    const Node* n = t.find(id);
    if (!n) return;
    order.push_back(id);
    for (const std::string& kid : n->children) preorder(t, kid, order);
}

} // namespace

std::string export_dot(const AttackTree& t) {
    ValidationReport findings = structure_findings(t);
    for (const Finding& f : findings)
        if (f.severity == Severity::Error)
            throw Error(ErrorCode::InvalidTree,
                        "cannot export: " + f.code + " at '" + f.node +
                            "': " + f.message);

    std::vector<std::string> order;
    preorder(t, t.root, order);

    std::string out = "digraph \"" + dot_escape(t.name) + "\" {\n";
    for (const std::string& id : order) {
        const Node& n = t.nodes.at(id);
        if (n.kind == NodeKind::Operator) {
            std::string label = operator_kind_name(n.op.value_or(OperatorKind::And));
            std::transform(label.begin(), label.end(), label.begin(),
                           [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
            out += "  \"" + dot_escape(id) + "\" [shape=diamond, label=\"" + label +
                   "\"];\n";
            continue;
        }
        std::string label = n.id + "\\n" + dot_escape(n.text);
        if (!n.annotations.empty()) {
            std::vector<Annotation> sorted = n.annotations;
            std::sort(sorted.begin(), sorted.end());
            std::string anns;
            for (const Annotation& a : sorted) {
                if (!anns.empty()) anns += "; ";
                anns += a.class_name + "=" + a.term;
            }
            label += "\\n" + dot_escape(anns);
        }
        out += "  \"" + dot_escape(id) + "\" [shape=box, label=\"" + label + "\"];\n";
    }
    for (const std::string& id : order) {
        const Node& n = t.nodes.at(id);
        for (const std::string& kid : n.children)
            out += "  \"" + dot_escape(id) + "\" -> \"" + dot_escape(kid) + "\";\n";
    }
    out += "}\n";
    return out;
}

} // namespace threatkb
