#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "threatkb/model.hpp"
#include "threatkb/ontology.hpp"

namespace threatkb {

/// Attack events in occurrence order. Entries must be distinct leaf ids of
/// the tree under analysis.
using Trace = std::vector<std::string>;

/// A minimal way to reach the objective: which leaf attacks must happen and
/// which must happen before which. `order` is kept transitively reduced and
/// its closure is a strict partial order over `leaf_set`.
struct Scenario {
    std::set<std::string> leaf_set;
    std::set<std::pair<std::string, std::string>> order; // (earlier, later)

    bool operator==(const Scenario&) const = default;
};

struct ScenarioResult {
    std::vector<Scenario> scenarios;
    /// CYCLIC_ORDER warnings for candidate scenarios dropped because a
    /// shared leaf appeared on both sides of a sequencing constraint.
    std::vector<Finding> warnings;
};

/// One term per adversary factor. Defaults are the least demanding level of
/// each factor.
struct AdversaryProfile {
    std::string expertise = "layman";
    std::string elapsed_time = "one_day";
    std::string equipment = "standard";
    std::string knowledge = "public";
    std::string window = "unnecessary";
    std::string location = "outsider";

    bool operator==(const AdversaryProfile&) const = default;
};

enum class Band { Basic, EnhancedBasic, Moderate, High, BeyondHigh };

const char* band_name(Band b); // "basic", "enhanced_basic", ...

struct PotentialRating {
    int points = 0;
    Band band = Band::Basic;

    bool operator==(const PotentialRating&) const = default;
};

/// Whether executing exactly the trace's attacks, in that order, reaches the
/// tree's objective. OR picks any satisfied branch; AND and implicit-AND
/// parents need all children; SEQUENCE needs every stage to finish before
/// the next stage starts (under the branch choices made inside each stage).
/// Throws UnknownLeaf for a non-leaf entry, InvalidTrace for duplicates.
bool satisfies(const AttackTree& t, const Trace& trace);

/// All minimal scenarios, ordered by leaf-set size, then leaf ids, then
/// order size, then order pairs. Candidates whose sequencing constraints
/// turn cyclic are dropped and reported as warnings.
ScenarioResult enumerate_scenarios(const AttackTree& t);

/// Points per factor level and the band for the total. Location carries no
/// points. Throws UnknownTerm for a term outside the built-in factor
/// vocabularies (the point table is defined over those only).
PotentialRating rate_potential(const AdversaryProfile& p);

/// Maps a total point count to its band. Bands tile the nonnegative
/// integers: 0-9, 10-13, 14-19, 20-24, 25+.
Band band_for_points(int points);

/// The weakest profile that can execute scenario `s` of tree `t`:
/// factor-wise maximum over the leaves' factor annotations, least level
/// where unannotated; insider if any leaf demands insider.
AdversaryProfile scenario_requirement(const AttackTree& t, const Scenario& s);
AdversaryProfile scenario_requirement(const AttackTree& t, const Scenario& s,
                                      const Ontology& o);

/// True iff `p` meets or exceeds `req` on every ranked factor and is an
/// insider whenever `req` demands one.
bool feasible(const AdversaryProfile& p, const AdversaryProfile& req);
bool feasible(const AdversaryProfile& p, const AdversaryProfile& req, const Ontology& o);

/// Parses "expertise=expert,elapsed_time=one_month,..." into a profile;
/// unset factors keep their defaults. Keys: expertise, elapsed_time,
/// equipment, knowledge, window, location. Throws Error on an unknown key
/// or a term outside the factor's vocabulary in `o`.
AdversaryProfile parse_profile(std::string_view spec, const Ontology& o);

} // namespace threatkb
