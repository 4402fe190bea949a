#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "threatkb/ontology.hpp"

using namespace threatkb;

namespace {

std::set<std::string> term_names(const Ontology& o, const std::string& cls) {
    const ClassDef* def = o.find_class(cls);
    REQUIRE(def != nullptr);
    std::set<std::string> out;
    for (const Term& t : def->vocabulary) out.insert(t.name);
    return out;
}

} // namespace

TEST_CASE("builtin ontology carries the expected classes and vocabularies") {
    Ontology o = builtin_ontology();

    CHECK(term_names(o, "AttackMode") == std::set<std::string>{"active", "passive"});
    CHECK(term_names(o, "AttackMethod") ==
          std::set<std::string>{"physical", "functional"});
    CHECK(term_names(o, "AttackConsequence") ==
          std::set<std::string>{"usurpation", "disruption", "deception", "disclosure"});
    CHECK(term_names(o, "AttackMotivation") ==
          std::set<std::string>{"individual", "economical", "political", "criminal"});
    CHECK(term_names(o, "Expertise") ==
          std::set<std::string>{"layman", "expert", "professional"});
    CHECK(term_names(o, "ElapsedTime") ==
          std::set<std::string>{"one_day", "one_week", "one_month", "six_months",
                                "beyond_six_months"});
    CHECK(term_names(o, "Equipment") ==
          std::set<std::string>{"standard", "specialized", "bespoke"});
    CHECK(term_names(o, "SystemKnowledge") ==
          std::set<std::string>{"public", "restricted", "sensitive", "critical"});
    CHECK(term_names(o, "WindowOfOpportunity") ==
          std::set<std::string>{"unnecessary", "easy", "moderate", "difficult"});
    CHECK(term_names(o, "Location") == std::set<std::string>{"insider", "outsider"});

    CHECK(o.find_class("AttackMode")->cardinality == Cardinality::Single);
    CHECK(o.find_class("AttackConsequence")->cardinality == Cardinality::Multi);
    CHECK(o.find_class("AttackMotivation")->cardinality == Cardinality::Multi);
    CHECK(o.find_class("Expertise")->ordered);
    CHECK(o.find_class("ElapsedTime")->ordered);
    CHECK(o.find_class("Equipment")->ordered);
    CHECK(o.find_class("SystemKnowledge")->ordered);
    CHECK(o.find_class("WindowOfOpportunity")->ordered);
    CHECK_FALSE(o.find_class("AttackMode")->ordered);
    CHECK_FALSE(o.find_class("Location")->ordered);
    CHECK(o.find_class("Nonexistent") == nullptr);
}

TEST_CASE("every builtin term has a nonempty description") {
    Ontology o = builtin_ontology();
    for (const ClassDef& def : o.classes())
        for (const Term& t : def.vocabulary) {
            CAPTURE(def.name);
            CAPTURE(t.name);
            CHECK_FALSE(t.description.empty());
        }
}

TEST_CASE("is_term checks membership and descends into subclasses") {
    Ontology o = builtin_ontology();
    CHECK(is_term(o, "AttackMode", "active"));
    CHECK_FALSE(is_term(o, "AttackMode", "physical"));
    CHECK_THROWS_AS((void)is_term(o, "NoSuchClass", "x"), Error);

    ClassDef sub;
    sub.name = "Spoofing";
    sub.parent = "AttackMethod";
    sub.cardinality = Cardinality::Single;
    sub.vocabulary = {{"can_spoof", "inject forged frames"}};
    o.add_class(sub);
    CHECK(is_term(o, "Spoofing", "can_spoof"));
    CHECK(is_term(o, "AttackMethod", "can_spoof"));  // via the subclass
    CHECK_FALSE(is_term(o, "Spoofing", "physical")); // parent terms do not flow down
}

TEST_CASE("classify_term walks the ancestor chain") {
    Ontology o = builtin_ontology();
    std::vector<std::string> chain = classify_term(o, "active");
    REQUIRE(chain.size() == 1);
    CHECK(chain[0] == "AttackMode");

    ClassDef sub;
    sub.name = "Spoofing";
    sub.parent = "AttackMethod";
    sub.vocabulary = {{"can_spoof", "inject forged frames"}};
    o.add_class(sub);
    chain = classify_term(o, "can_spoof");
    REQUIRE(chain.size() == 2);
    CHECK(chain[0] == "Spoofing");
    CHECK(chain[1] == "AttackMethod");

    CHECK(classify_term(o, "Martian").empty());
}

TEST_CASE("severity_rank follows vocabulary order and rejects misuse") {
    Ontology o = builtin_ontology();
    CHECK(severity_rank(o, "Expertise", "layman") == 0);
    CHECK(severity_rank(o, "Expertise", "expert") == 1);
    CHECK(severity_rank(o, "Expertise", "professional") == 2);
    CHECK(severity_rank(o, "ElapsedTime", "beyond_six_months") == 4);
    CHECK(severity_rank(o, "WindowOfOpportunity", "difficult") == 3);

    CHECK_THROWS_AS((void)severity_rank(o, "NoSuchClass", "x"), Error);
    // Unordered class is rejected before the term is looked at.
    try {
        (void)severity_rank(o, "AttackMode", "nonsense");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnorderedClass);
    }
    try {
        (void)severity_rank(o, "Expertise", "nonsense");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownTerm);
    }
}

TEST_CASE("ontology rejects duplicate terms and duplicate classes") {
    Ontology o = builtin_ontology();
    CHECK_THROWS_AS(o.add_terms("Expertise", {{"expert", "again"}}), Error);
    ClassDef dup;
    dup.name = "Expertise";
    CHECK_THROWS_AS(o.add_class(dup), Error);
    CHECK_THROWS_AS(o.add_terms("NoSuchClass", {{"x", "y"}}), Error);
}

TEST_CASE("extension files add classes, subclasses, and reopen vocabularies") {
    Ontology base = builtin_ontology();
    Ontology o = extend_ontology(base,
                                 "# comment line\n"
                                 "class Spoofing extends AttackMethod single\n"
                                 "  term gps_spoof \"forge positioning signals\"\n"
                                 "  term can_spoof \"inject forged frames\"\n"
                                 "\n"
                                 "class AttackSurface multi\n"
                                 "  term obd_port \"diagnostic connector\"\n"
                                 "\n"
                                 "class AttackSurface\n"
                                 "  term telematics \"remote entry point\"\n");
    REQUIRE(o.find_class("Spoofing") != nullptr);
    CHECK(o.find_class("Spoofing")->parent == std::optional<std::string>{"AttackMethod"});
    CHECK(o.find_class("Spoofing")->cardinality == Cardinality::Single);
    CHECK(is_term(o, "AttackMethod", "can_spoof"));
    CHECK(term_names(o, "AttackSurface") ==
          std::set<std::string>{"obd_port", "telematics"});
    // The base object is untouched.
    CHECK(base.find_class("Spoofing") == nullptr);
}

TEST_CASE("extension files report line-numbered errors") {
    Ontology base = builtin_ontology();
    auto expect_error = [&](const std::string& text, const std::string& needle) {
        try {
            (void)extend_ontology(base, text);
            FAIL("expected an error for: ", text);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ExtensionSyntax);
            CAPTURE(e.what());
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_error("term orphan \"no class open\"\n", "line 1");
    expect_error("class Bad extends NoSuchParent\n  term t \"x\"\n", "NoSuchParent");
    expect_error("class X single\n  term BadName \"caps\"\n", "BadName");
    expect_error("class X single\n  term t \"a\"\n  term t \"b\"\n", "line 3");
    expect_error("class Expertise single\n", "already exists");
    expect_error("class X wobbly\n", "wobbly");
    expect_error("class X\n  term t \"unterminated\n", "line 2");
}

TEST_CASE("extension terms may be appended to a builtin class") {
    Ontology base = builtin_ontology();
    Ontology o = extend_ontology(base,
                                 "class Expertise\n"
                                 "  term nation_state \"beyond commercial capability\"\n");
    CHECK(is_term(o, "Expertise", "nation_state"));
    CHECK(severity_rank(o, "Expertise", "nation_state") == 3);
}
