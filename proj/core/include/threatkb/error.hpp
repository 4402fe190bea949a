#pragma once

#include <stdexcept>
#include <string>

namespace threatkb {

enum class ErrorCode {
    UnknownClass,
    UnknownTerm,
    UnorderedClass,
    DuplicateTerm,
    ExtensionSyntax,
    UnknownNode,
    VocabularyMismatch,
    CardinalityViolation,
    InvalidTree,
    InvalidTrace,
    UnknownLeaf,
    UnsafeRule,
    RuleSyntax,
    MalformedQuery,
    ProfileSyntax,
    IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

enum class Severity { Warning, Error };

const char* severity_name(Severity s);

/// One diagnostic produced by a validation or reasoning check.
/// `node` names the model element or fact subject it points at; empty when
/// the finding applies to the whole input.
struct Finding {
    Severity severity = Severity::Error;
    std::string code;
    std::string node;
    std::string message;

    bool operator==(const Finding&) const = default;
};

} // namespace threatkb
