#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "threatkb/model.hpp"

namespace threatkb {

/// Position of a token in the source text, 1-based.
struct SourceSpan {
    int line = 1;
    int column = 1;
    int length = 1;

    bool operator==(const SourceSpan&) const = default;
};

struct ParseError {
    SourceSpan span;
    std::string code;    // UNEXPECTED_TOKEN, DUPLICATE_ID, OPERATOR_ARITY, ...
    std::string message;
    std::vector<std::string> expected; // token names, when recovery knows them

    bool operator==(const ParseError&) const = default;
};

struct ParseResult {
    /// Present when the parse recovered a usable tree; absent on fatal
    /// errors (no attacktree header, unrecoverable shape).
    std::optional<AttackTree> tree;
    std::vector<ParseError> errors;

    bool ok() const { return tree.has_value() && errors.empty(); }
};

/// Parses `.atk` text. Collects up to 20 errors, resynchronizing at the
/// next keyword or closing brace. A tree returned alongside an empty error
/// list passes structure_findings with no findings.
ParseResult parse(std::string_view text);

/// Canonical text form: 2-space indentation, annotations sorted by class
/// then term, child order preserved, trailing newline. parse(serialize(t))
/// is structurally equal to t. Throws Error{InvalidTree} when t has
/// structure findings.
std::string serialize(const AttackTree& t);

} // namespace threatkb
