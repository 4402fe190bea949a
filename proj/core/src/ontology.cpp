#include "threatkb/ontology.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace threatkb {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownClass: return "UnknownClass";
        case ErrorCode::UnknownTerm: return "UnknownTerm";
        case ErrorCode::UnorderedClass: return "UnorderedClass";
        case ErrorCode::DuplicateTerm: return "DuplicateTerm";
        case ErrorCode::ExtensionSyntax: return "ExtensionSyntax";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::VocabularyMismatch: return "VocabularyMismatch";
        case ErrorCode::CardinalityViolation: return "CardinalityViolation";
        case ErrorCode::InvalidTree: return "InvalidTree";
        case ErrorCode::InvalidTrace: return "InvalidTrace";
        case ErrorCode::UnknownLeaf: return "UnknownLeaf";
        case ErrorCode::UnsafeRule: return "UnsafeRule";
        case ErrorCode::RuleSyntax: return "RuleSyntax";
        case ErrorCode::MalformedQuery: return "MalformedQuery";
        case ErrorCode::ProfileSyntax: return "ProfileSyntax";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

const char* severity_name(Severity s) {
    return s == Severity::Error ? "error" : "warning";
}

bool ClassDef::has_term(std::string_view term) const {
    return std::any_of(vocabulary.begin(), vocabulary.end(),
                       [&](const Term& t) { return t.name == term; });
}

void Ontology::add_class(ClassDef def) {
    if (def.name.empty())
        throw Error(ErrorCode::ExtensionSyntax, "class name must not be empty");
    if (find_class(def.name))
        throw Error(ErrorCode::ExtensionSyntax, "duplicate class '" + def.name + "'");
    if (def.parent && !find_class(*def.parent))
        throw Error(ErrorCode::UnknownClass,
                    "unknown parent class '" + *def.parent + "' for '" + def.name + "'");
    for (const Term& t : def.vocabulary) {
        if (auto owner = owner_of(t.name))
            throw Error(ErrorCode::DuplicateTerm,
                        "term '" + t.name + "' already belongs to class '" + *owner + "'");
    }
    for (size_t i = 0; i < def.vocabulary.size(); ++i)
        for (size_t j = i + 1; j < def.vocabulary.size(); ++j)
            if (def.vocabulary[i].name == def.vocabulary[j].name)
                throw Error(ErrorCode::DuplicateTerm,
                            "term '" + def.vocabulary[i].name + "' repeated in class '" +
                                def.name + "'");
    if (!def.parent)
        roots_.insert(def.name);
    classes_.push_back(std::move(def));
}

void Ontology::add_terms(const std::string& class_name, const std::vector<Term>& terms) {
    auto it = std::find_if(classes_.begin(), classes_.end(),
                           [&](const ClassDef& c) { return c.name == class_name; });
    if (it == classes_.end())
        throw Error(ErrorCode::UnknownClass, "unknown class '" + class_name + "'");
    for (const Term& t : terms) {
        if (auto owner = owner_of(t.name))
            throw Error(ErrorCode::DuplicateTerm,
                        "term '" + t.name + "' already belongs to class '" + *owner + "'");
        it->vocabulary.push_back(t);
    }
}

const ClassDef* Ontology::find_class(std::string_view name) const {
    for (const ClassDef& c : classes_)
        if (c.name == name) return &c;
    return nullptr;
}

std::optional<std::string> Ontology::owner_of(std::string_view term) const {
    for (const ClassDef& c : classes_)
        if (c.has_term(term)) return c.name;
    return std::nullopt;
}

std::vector<std::string> Ontology::children_of(std::string_view name) const {
    std::vector<std::string> out;
    for (const ClassDef& c : classes_)
        if (c.parent && *c.parent == name) out.push_back(c.name);
    return out;
}

namespace {

ClassDef make_class(std::string name, Cardinality card, bool ordered,
                    std::vector<Term> vocab) {
    ClassDef def;
    def.name = std::move(name);
    def.cardinality = card;
    def.ordered = ordered;
    def.vocabulary = std::move(vocab);
    return def;
}

} // namespace

Ontology builtin_ontology() {
    Ontology o;
    o.add_class(make_class("AttackMode", Cardinality::Single, false,
                           {{"active", "interferes with or alters system operation"},
                            {"passive", "collects information without altering operation"}}));
    o.add_class(make_class("AttackMethod", Cardinality::Single, false,
                           {{"physical", "acts on hardware or its physical environment"},
                            {"functional", "manipulates logic or data through regular interfaces"}}));
    o.add_class(make_class("AttackConsequence", Cardinality::Multi, false,
                           {{"usurpation", "unauthorized control or misuse of system functions"},
                            {"disruption", "degrades or interrupts intended operation"},
                            {"deception", "makes the system accept false data or identity"},
                            {"disclosure", "exposes information to unauthorized parties"}}));
    o.add_class(make_class("AttackMotivation", Cardinality::Multi, false,
                           {{"individual", "personal gain or reputation"},
                            {"economical", "commercial advantage at organizational scale"},
                            {"political", "damage to an organization's or state's standing"},
                            {"criminal", "criminal, destructive, or terrorist intent"}}));
    o.add_class(make_class("Expertise", Cardinality::Single, true,
                           {{"layman", "no particular knowledge needed"},
                            {"expert", "familiar with the security behavior of the product type"},
                            {"professional", "specialist familiar with implementation internals"}}));
    o.add_class(make_class("ElapsedTime", Cardinality::Single, true,
                           {{"one_day", "attack identified and mounted within a day"},
                            {"one_week", "up to a week of effort"},
                            {"one_month", "up to a month of effort"},
                            {"six_months", "up to six months of effort"},
                            {"beyond_six_months", "more than six months of effort"}}));
    o.add_class(make_class("Equipment", Cardinality::Single, true,
                           {{"standard", "readily available equipment"},
                            {"specialized", "equipment not readily available but obtainable"},
                            {"bespoke", "equipment specially produced for the attack"}}));
    o.add_class(make_class("SystemKnowledge", Cardinality::Single, true,
                           {{"public", "only published information needed"},
                            {"restricted", "controlled design information needed"},
                            {"sensitive", "internal design or configuration data needed"},
                            {"critical", "closely held secrets such as key material needed"}}));
    o.add_class(make_class("WindowOfOpportunity", Cardinality::Single, true,
                           {{"unnecessary", "no particular access window required"},
                            {"easy", "access easily arranged without notice"},
                            {"moderate", "access requires some preparation or luck"},
                            {"difficult", "access windows are rare and closely monitored"}}));
    o.add_class(make_class("Location", Cardinality::Single, false,
                           {{"insider", "operates with legitimate access to the system"},
                            {"outsider", "operates without legitimate access"}}));
    return o;
}

bool is_term(const Ontology& o, std::string_view class_name, std::string_view term) {
    const ClassDef* def = o.find_class(class_name);
    if (!def)
        throw Error(ErrorCode::UnknownClass,
                    "unknown class '" + std::string(class_name) + "'");
    if (def->has_term(term)) return true;
    for (const std::string& child : o.children_of(class_name))
        if (is_term(o, child, term)) return true;
    return false;
}

std::vector<std::string> classify_term(const Ontology& o, std::string_view term) {
    std::vector<std::string> chain;
    auto owner = o.owner_of(term);
    if (!owner) return chain;
    const ClassDef* def = o.find_class(*owner);
    while (def) {
        chain.push_back(def->name);
        def = def->parent ? o.find_class(*def->parent) : nullptr;
    }
    return chain;
}

int severity_rank(const Ontology& o, std::string_view class_name, std::string_view term) {
    const ClassDef* def = o.find_class(class_name);
    if (!def)
        throw Error(ErrorCode::UnknownClass,
                    "unknown class '" + std::string(class_name) + "'");
    if (!def->ordered)
        throw Error(ErrorCode::UnorderedClass,
                    "class '" + def->name + "' is not rank-ordered");
    for (size_t i = 0; i < def->vocabulary.size(); ++i)
        if (def->vocabulary[i].name == term) return static_cast<int>(i);
    throw Error(ErrorCode::UnknownTerm,
                "term '" + std::string(term) + "' is not in the vocabulary of '" +
                    def->name + "'");
}

namespace {

// --- extension-file parsing ---

std::string_view trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Cuts a trailing comment, ignoring '#' inside double quotes.
std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '\\' && in_string && i + 1 < line.size()) { ++i; continue; }
        if (c == '"') in_string = !in_string;
        else if (c == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

bool is_term_name(std::string_view s) {
    // lowercase snake_case, starting with a letter
    if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (std::islower(static_cast<unsigned char>(c)) ||
                std::isdigit(static_cast<unsigned char>(c)) || c == '_');
    });
}

[[noreturn]] void fail(int line_no, const std::string& what) {
    throw Error(ErrorCode::ExtensionSyntax,
                "ontology extension line " + std::to_string(line_no) + ": " + what);
}

std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

// Parses `term <name> "<description>"` after the keyword has been sighted.
std::pair<std::string, std::string> parse_term_line(std::string_view rest, int line_no) {
    rest = trim(rest);
    size_t name_end = 0;
    while (name_end < rest.size() &&
           !std::isspace(static_cast<unsigned char>(rest[name_end])))
        ++name_end;
    std::string name(rest.substr(0, name_end));
    if (!is_term_name(name))
        fail(line_no, "term name '" + name + "' is not a lowercase snake_case identifier");
    std::string_view tail = trim(rest.substr(name_end));
    if (tail.size() < 2 || tail.front() != '"')
        fail(line_no, "expected quoted description after term name");
    std::string desc;
    size_t i = 1;
    for (; i < tail.size(); ++i) {
        char c = tail[i];
        if (c == '\\') {
            if (i + 1 >= tail.size()) fail(line_no, "dangling escape in description");
            char e = tail[++i];
            if (e == '"') desc += '"';
            else if (e == '\\') desc += '\\';
            else if (e == 'n') desc += '\n';
            else fail(line_no, std::string("unsupported escape '\\") + e + "'");
        } else if (c == '"') {
            break;
        } else {
            desc += c;
        }
    }
    if (i >= tail.size() || tail[i] != '"') fail(line_no, "unterminated description string");
    if (!trim(tail.substr(i + 1)).empty()) fail(line_no, "trailing input after description");
    return {std::move(name), std::move(desc)};
}

} // namespace

Ontology extend_ontology(const Ontology& base, std::string_view source) {
    Ontology out = base;
    std::string current_class;

    int line_no = 0;
    size_t pos = 0;
    while (pos <= source.size()) {
        size_t nl = source.find('\n', pos);
        std::string_view raw = source.substr(pos, nl == std::string_view::npos
                                                      ? std::string_view::npos
                                                      : nl - pos);
        pos = (nl == std::string_view::npos) ? source.size() + 1 : nl + 1;
        ++line_no;

        std::string_view line = strip_comment(raw);
        bool indented = !line.empty() &&
                        std::isspace(static_cast<unsigned char>(line.front()));
        std::string_view body = trim(line);
        if (body.empty()) continue;

        if (body.substr(0, 5) == "class" &&
            (body.size() == 5 || std::isspace(static_cast<unsigned char>(body[5])))) {
            auto words = split_words(body.substr(5));
            if (words.empty()) fail(line_no, "missing class name");
            std::string name = words[0];
            if (!is_identifier(name)) fail(line_no, "class name '" + name + "' is not an identifier");

            std::optional<std::string> parent;
            std::optional<Cardinality> card;
            bool ordered = false;
            for (size_t i = 1; i < words.size(); ++i) {
                if (words[i] == "extends") {
                    if (parent || i + 1 >= words.size()) fail(line_no, "malformed extends clause");
                    parent = words[++i];
                } else if (words[i] == "single") {
                    card = Cardinality::Single;
                } else if (words[i] == "multi") {
                    card = Cardinality::Multi;
                } else if (words[i] == "ordered") {
                    ordered = true;
                } else {
                    fail(line_no, "unexpected token '" + words[i] + "' in class declaration");
                }
            }

            if (out.find_class(name)) {
                // Reopening an existing class may only append terms.
                if (parent || card || ordered)
                    fail(line_no, "class '" + name +
                                      "' already exists; reopening it cannot change its declaration");
                current_class = name;
            } else {
                ClassDef def;
                def.name = name;
                def.parent = parent;
                def.cardinality = card.value_or(Cardinality::Multi);
                def.ordered = ordered;
                if (parent && !out.find_class(*parent))
                    fail(line_no, "unknown parent class '" + *parent + "'");
                out.add_class(std::move(def));
                current_class = name;
            }
            continue;
        }

        if (body.substr(0, 4) == "term" &&
            (body.size() == 4 || std::isspace(static_cast<unsigned char>(body[4])))) {
            if (!indented || current_class.empty())
                fail(line_no, "term line outside of a class block");
            auto [name, desc] = parse_term_line(body.substr(4), line_no);
            try {
                out.add_terms(current_class, {{name, desc}});
            } catch (const Error& e) {
                fail(line_no, e.what());
            }
            continue;
        }

        fail(line_no, "expected 'class' or 'term'");
    }
    return out;
}

} // namespace threatkb
