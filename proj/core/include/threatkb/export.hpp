#pragma once

#include <string>

#include "threatkb/model.hpp"
#include "threatkb/reasoner.hpp"

namespace threatkb {

enum class ExportFormat { FactsText, Dot };

/// One fact per line, `pred(arg1,arg2). # provenance`, in the base's
/// deterministic order. Line count equals the number of facts.
std::string export_facts(const FactBase& fb);

/// Graphviz digraph: boxes for objective/goal/attack nodes (id, text, and
/// annotations in the label), diamonds for operators, edges in child order.
/// Throws Error{InvalidTree} when t has structure findings.
std::string export_dot(const AttackTree& t);

} // namespace threatkb
