// threatkb — command-line front end for the attack-tree toolkit.
//
// Subcommands: validate, scenarios, rate, query, export, check.
// Exit codes: 0 success, 1 findings reported, 2 usage or parse error,
// 3 internal error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "threatkb/analysis.hpp"
#include "threatkb/dsl.hpp"
#include "threatkb/export.hpp"
#include "threatkb/model.hpp"
#include "threatkb/ontology.hpp"
#include "threatkb/reasoner.hpp"

namespace {

using nlohmann::ordered_json;
using namespace threatkb;

constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::optional<std::string>& path, const std::string& body) {
    if (!path) {
        std::cout << body;
        return;
    }
    std::ofstream out(*path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + *path + "'");
    out << body;
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + *path + "'");
}

Ontology load_ontology(const std::string& flag_path) {
    std::string path = flag_path;
    if (path.empty()) {
        if (const char* env = std::getenv("THREATKB_ONTOLOGY")) path = env;
    }
    Ontology base = builtin_ontology();
    if (path.empty()) return base;
    return extend_ontology(base, read_file(path));
}

// Parses the tree or exits with code 2 after printing file:line:col errors.
AttackTree load_tree(const std::string& path) {
    ParseResult result = parse(read_file(path));
    if (!result.ok()) {
        for (const ParseError& e : result.errors)
            std::cerr << path << ':' << e.span.line << ':' << e.span.column << ": error["
                      << e.code << "]: " << e.message << '\n';
        std::exit(kExitUsage);
    }
    return *std::move(result.tree);
}

std::string finding_line(const Finding& f) {
    std::string out = severity_name(f.severity);
    out += ": ";
    out += f.code;
    if (!f.node.empty()) {
        out += " at '";
        out += f.node;
        out += "'";
    }
    out += ": ";
    out += f.message;
    return out;
}

ordered_json findings_json(const ValidationReport& findings) {
    ordered_json arr = ordered_json::array();
    for (const Finding& f : findings)
        arr.push_back({{"severity", severity_name(f.severity)},
                       {"code", f.code},
                       {"node", f.node},
                       {"message", f.message}});
    return arr;
}

// Prints validation errors to stderr; returns false if the tree is unusable.
bool require_valid(const AttackTree& tree, const Ontology& onto) {
    ValidationReport findings = validate_structure(tree, onto);
    if (findings.empty()) return true;
    for (const Finding& f : findings) std::cerr << finding_line(f) << '\n';
    return false;
}

std::string profile_line(const AdversaryProfile& p) {
    return "expertise=" + p.expertise + " elapsed_time=" + p.elapsed_time +
           " equipment=" + p.equipment + " knowledge=" + p.knowledge +
           " window=" + p.window + " location=" + p.location;
}

int cmd_validate(const std::string& file, const std::string& onto_path, bool json) {
    Ontology onto = load_ontology(onto_path);
    AttackTree tree = load_tree(file);
    ValidationReport findings = validate_structure(tree, onto);
    if (json) {
        ordered_json doc{{"file", file}, {"findings", findings_json(findings)}};
        std::cout << doc.dump(2) << '\n';
    } else if (findings.empty()) {
        std::cout << "OK: 0 findings\n";
    } else {
        for (const Finding& f : findings) std::cout << finding_line(f) << '\n';
    }
    return findings.empty() ? kExitOk : kExitFindings;
}

int cmd_scenarios(const std::string& file, const std::string& onto_path,
                  const std::string& profile_spec, bool json) {
    Ontology onto = load_ontology(onto_path);
    AttackTree tree = load_tree(file);
    if (!require_valid(tree, onto)) return kExitFindings;

    std::optional<AdversaryProfile> filter;
    if (!profile_spec.empty()) filter = parse_profile(profile_spec, onto);

    ScenarioResult result = enumerate_scenarios(tree);
    for (const Finding& w : result.warnings) std::cerr << finding_line(w) << '\n';

    struct Row {
        const Scenario* scenario;
        AdversaryProfile requires_profile;
        PotentialRating rating;
    };
    std::vector<Row> rows;
    for (const Scenario& s : result.scenarios) {
        AdversaryProfile req = scenario_requirement(tree, s, onto);
        if (filter && !feasible(*filter, req, onto)) continue;
        rows.push_back({&s, req, rate_potential(req)});
    }

    if (json) {
        ordered_json scenarios = ordered_json::array();
        for (const Row& row : rows) {
            ordered_json order = ordered_json::array();
            for (const auto& [a, b] : row.scenario->order)
                order.push_back(ordered_json::array({a, b}));
            const AdversaryProfile& r = row.requires_profile;
            scenarios.push_back(
                {{"leaves", row.scenario->leaf_set},
                 {"order", order},
                 {"requires",
                  {{"expertise", r.expertise},
                   {"elapsed_time", r.elapsed_time},
                   {"equipment", r.equipment},
                   {"knowledge", r.knowledge},
                   {"window", r.window},
                   {"location", r.location}}},
                 {"rating",
                  {{"points", row.rating.points}, {"band", band_name(row.rating.band)}}}});
        }
        ordered_json doc{{"tree", tree.name}, {"scenarios", scenarios}};
        std::cout << doc.dump(2) << '\n';
    } else {
        if (rows.empty()) std::cout << "no scenarios\n";
        int i = 0;
        for (const Row& row : rows) {
            std::cout << "scenario " << ++i << '\n';
            std::cout << "  leaves:";
            for (const std::string& leaf : row.scenario->leaf_set) std::cout << ' ' << leaf;
            std::cout << '\n';
            if (row.scenario->order.empty()) {
                std::cout << "  order: (none)\n";
            } else {
                std::cout << "  order: ";
                bool first = true;
                for (const auto& [a, b] : row.scenario->order) {
                    if (!first) std::cout << ", ";
                    std::cout << a << " < " << b;
                    first = false;
                }
                std::cout << '\n';
            }
            std::cout << "  requires: " << profile_line(row.requires_profile) << '\n';
            std::cout << "  rating: points=" << row.rating.points
                      << " band=" << band_name(row.rating.band) << '\n';
        }
    }
    return result.warnings.empty() ? kExitOk : kExitFindings;
}

int cmd_rate(const std::string& profile_spec, const std::string& onto_path) {
    Ontology onto = load_ontology(onto_path);
    AdversaryProfile profile = parse_profile(profile_spec, onto);
    PotentialRating rating = rate_potential(profile);
    std::cout << "points=" << rating.points << " band=" << band_name(rating.band)
              << '\n';
    return kExitOk;
}

int cmd_query(const std::string& file, const std::string& select,
              const std::string& rules_path, const std::string& onto_path) {
    Ontology onto = load_ontology(onto_path);
    AttackTree tree = load_tree(file);
    if (!require_valid(tree, onto)) return kExitFindings;

    FactBase fb = translate(tree, onto);
    if (!rules_path.empty()) fb = apply_rules(fb, parse_rules(read_file(rules_path)));

    Query q = parse_query(select);
    std::vector<BindingsRow> rows = query(fb, q);

    for (std::size_t i = 0; i < q.select_vars.size(); ++i) {
        if (i) std::cout << '\t';
        std::cout << '?' << q.select_vars[i];
    }
    std::cout << '\n';
    for (const BindingsRow& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) std::cout << '\t';
            std::cout << row[i];
        }
        std::cout << '\n';
    }
    return kExitOk;
}

int cmd_export(const std::string& file, const std::string& format,
               const std::optional<std::string>& out,
               const std::string& rules_path, const std::string& onto_path) {
    Ontology onto = load_ontology(onto_path);
    AttackTree tree = load_tree(file);
    if (!require_valid(tree, onto)) return kExitFindings;

    std::string body;
    if (format == "facts") {
        FactBase fb = translate(tree, onto);
        if (!rules_path.empty()) fb = apply_rules(fb, parse_rules(read_file(rules_path)));
        body = export_facts(fb);
    } else if (format == "dot") {
        body = export_dot(tree);
    } else {
        std::cerr << "error: unknown export format '" << format
                  << "' (expected facts or dot)\n";
        return kExitUsage;
    }
    write_output(out, body);
    return kExitOk;
}

int cmd_check(const std::string& file, const std::string& rules_path,
              const std::string& onto_path) {
    Ontology onto = load_ontology(onto_path);
    AttackTree tree = load_tree(file);

    ValidationReport findings = validate_structure(tree, onto);
    if (!findings.empty()) {
        for (const Finding& f : findings) std::cout << finding_line(f) << '\n';
        return kExitFindings;
    }

    FactBase fb = translate(tree, onto);
    std::vector<Rule> rules;
    if (!rules_path.empty()) {
        rules = parse_rules(read_file(rules_path));
        fb = apply_rules(fb, rules);
    }

    ValidationReport report = check_consistency(fb, onto);
    for (std::size_t k = 0; k < rules.size(); ++k) {
        std::vector<Atom> atoms = rules[k].body;
        atoms.insert(atoms.end(), rules[k].head.begin(), rules[k].head.end());
        for (Finding f : check_satisfiability(atoms, onto)) {
            f.message = "rule " + std::to_string(k + 1) + ": " + f.message;
            report.push_back(std::move(f));
        }
    }

    if (report.empty()) {
        std::cout << "OK: 0 findings\n";
        return kExitOk;
    }
    for (const Finding& f : report) std::cout << finding_line(f) << '\n';
    return kExitFindings;
}

int usage_exit_code(const Error& e) {
    switch (e.code()) {
        case ErrorCode::IoError:
        case ErrorCode::ExtensionSyntax:
        case ErrorCode::RuleSyntax:
        case ErrorCode::MalformedQuery:
        case ErrorCode::ProfileSyntax:
        case ErrorCode::UnsafeRule:
        case ErrorCode::UnknownTerm:
        case ErrorCode::UnknownClass:
            return kExitUsage;
        default:
            return kExitInternal;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"attack-tree modeling, rating, and ontology reasoning toolkit",
                 "threatkb"};
    app.require_subcommand(1);

    std::string file;
    std::string onto_path;
    std::string profile_spec;
    std::string select;
    std::string rules_path;
    std::string format;
    std::string out_path;
    bool json = false;

    auto add_ontology = [&](CLI::App* cmd) {
        cmd->add_option("--ontology", onto_path,
                        "Ontology extension file layered over the built-in classes "
                        "(default: $THREATKB_ONTOLOGY)");
    };

    CLI::App* validate =
        app.add_subcommand("validate", "Check structure and vocabulary of a tree");
    validate->add_option("file", file, "Attack-tree file (.atk)")->required();
    add_ontology(validate);
    validate->add_flag("--json", json, "Machine-readable findings report");

    CLI::App* scenarios = app.add_subcommand(
        "scenarios", "Enumerate minimal attack scenarios with orders and ratings");
    scenarios->add_option("file", file, "Attack-tree file (.atk)")->required();
    add_ontology(scenarios);
    scenarios->add_option("--profile", profile_spec,
                          "Adversary profile k=v,... — keep only feasible scenarios");
    scenarios->add_flag("--json", json, "Machine-readable scenario report");

    CLI::App* rate =
        app.add_subcommand("rate", "Rate an adversary profile's attack potential");
    rate->add_option("--profile", profile_spec,
                     "Profile, e.g. expertise=expert,elapsed_time=one_month")
        ->required();
    add_ontology(rate);

    CLI::App* query_cmd =
        app.add_subcommand("query", "Run a conjunctive query over the tree's facts");
    query_cmd->add_option("file", file, "Attack-tree file (.atk)")->required();
    query_cmd->add_option("--select", select, "Query, e.g. select ?x where attack(?x)")
        ->required();
    query_cmd->add_option("--rules", rules_path, "Horn rules applied before the query");
    add_ontology(query_cmd);

    CLI::App* export_cmd =
        app.add_subcommand("export", "Write the tree as a fact base or DOT graph");
    export_cmd->add_option("file", file, "Attack-tree file (.atk)")->required();
    export_cmd->add_option("--format", format, "facts or dot")->required();
    export_cmd->add_option("--out", out_path, "Output path (default: stdout)");
    export_cmd->add_option("--rules", rules_path,
                           "Horn rules applied before a facts export");
    add_ontology(export_cmd);

    CLI::App* check = app.add_subcommand(
        "check", "Translate, apply rules, and report consistency/satisfiability");
    check->add_option("file", file, "Attack-tree file (.atk)")->required();
    check->add_option("--rules", rules_path, "Horn rules applied before checking");
    add_ontology(check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (validate->parsed()) return cmd_validate(file, onto_path, json);
        if (scenarios->parsed())
            return cmd_scenarios(file, onto_path, profile_spec, json);
        if (rate->parsed()) return cmd_rate(profile_spec, onto_path);
        if (query_cmd->parsed()) return cmd_query(file, select, rules_path, onto_path);
        if (export_cmd->parsed())
            return cmd_export(file, format,
                              out_path.empty() ? std::nullopt
                                               : std::optional<std::string>(out_path),
                              rules_path, onto_path);
        if (check->parsed()) return cmd_check(file, rules_path, onto_path);
    } catch (const Error& e) {
        std::cerr << "error[" << error_code_name(e.code()) << "]: " << e.what() << '\n';
        return usage_exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitUsage;
}
